"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation. Flag values take precedence over config-file values, which take
precedence over defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .io import DataError
from .pipeline import PRESETS, PipelineConfig, run_pipeline

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="metablocking",
        description="Classifier-driven candidate-pair pruning for entity resolution",
    )
    parser.add_argument("--config", help="JSON config file with flag equivalents")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named configuration")
    parser.add_argument("--e1", help="first clean collection")
    parser.add_argument("--e2", help="second clean collection")
    parser.add_argument("--dirty", help="single dirty collection (deduplication mode)")
    parser.add_argument("--gt", help="ground-truth CSV of matching record keys")
    parser.add_argument("--format", dest="fmt", choices=["csv", "jsonl"])
    parser.add_argument("--key-column", dest="key_column")
    parser.add_argument(
        "--algorithm",
        choices=["bcl", "wep", "wnp", "rwnp", "blast", "cep", "cnp", "rcnp"],
    )
    parser.add_argument("--features", help="comma-separated feature names")
    parser.add_argument("--per-class", dest="per_class", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--blast-ratio", dest="blast_ratio", type=float)
    parser.add_argument("--filter-ratio", dest="filter_ratio", type=float)
    parser.add_argument("--report", help="write the JSON report here")
    parser.add_argument("--model-out", dest="model_out")
    parser.add_argument("--retained-out", dest="retained_out")
    parser.add_argument("--export-density", dest="export_density")
    parser.add_argument("--export-block-dist", dest="export_block_dist")
    parser.add_argument("--subset-search", dest="subset_search", action="store_true", default=None)
    parser.add_argument("--training-sweep", dest="training_sweep", action="store_true", default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config_fields = {f.name for f in fields(PipelineConfig)}
    values: dict = {}

    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise DataError(f"config file not found: {path}")
        try:
            file_values = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid config file {path}: {exc}") from exc
        unknown = set(file_values) - config_fields - {"preset"}
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        if "preset" in file_values and not args.preset:
            args.preset = file_values.pop("preset")
        values.update(file_values)

    if args.preset:
        preset = PRESETS[args.preset]
        values.setdefault("algorithm", preset["algorithm"])
        values.setdefault(
            "features", ",".join(f.value for f in preset["features"].features)
        )
        if "per_class" not in values:
            values["per_class"] = preset["per_class"]

    for name in config_fields:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value

    if "sweep_sizes" in values:
        values["sweep_sizes"] = tuple(values["sweep_sizes"])
    if "seeds" in values:
        values["seeds"] = tuple(values["seeds"])
    return PipelineConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        if not config.gt:
            parser.error("--gt is required")
        payload = run_pipeline(config)
    except SystemExit:
        raise
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report = payload["report"]
    print(
        "retained {out} of {inn} candidates | recall {re:.4f} precision {pr:.4f} "
        "f1 {f1:.4f}".format(
            out=report["candidates_out"],
            inn=report["candidates_in"],
            re=report["recall"],
            pr=report["precision"],
            f1=report["f1"],
        )
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
