"""End-to-end orchestration: blocking, featurization, training and pruning.

``GeneralizedMetaBlocker`` exposes the whole flow behind a scikit-learn style
estimator, while ``run_pipeline`` drives it from a file-based configuration
for the command line.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from sklearn.base import BaseEstimator

from . import blocking
from .classifier import TrainedModel, sample_training, score_pairs, train
from .evaluation import (
    EvaluationReport,
    evaluate,
    export_common_block_distribution,
    export_probability_density,
    feature_subset_search,
    training_sweep,
)
from .io import DataError, ingest, read_ground_truth
from .model import CandidatePair, EntityProfile, GroundTruth, Source
from .pruning import PruningAlgorithm, PruningConfig, prune, write_retained_csv
from .weighting import (
    BLAST_SET,
    LEGACY_SET,
    RCNP_SET,
    FeatureId,
    FeatureSet,
    featurize,
)

PRESETS = {
    "blast-50": {"algorithm": "blast", "features": BLAST_SET, "per_class": 25},
    "rcnp-50": {"algorithm": "rcnp", "features": RCNP_SET, "per_class": 25},
    # per-class size resolved from the ground truth at run time (5% of positives)
    "legacy-bcl": {"algorithm": "bcl", "features": LEGACY_SET, "per_class": None},
}


def parse_feature_names(names: str) -> FeatureSet:
    """Parse a comma-separated feature list such as 'cf-ibf,raccb,rs,nrs'."""
    ids = []
    for name in names.split(","):
        name = name.strip().lower()
        try:
            ids.append(FeatureId(name))
        except ValueError:
            valid = ", ".join(f.value for f in FeatureId)
            raise ValueError(f"unknown feature {name!r}; expected one of: {valid}")
    return FeatureSet(tuple(ids))


class GeneralizedMetaBlocker(BaseEstimator):
    """Refines a block collection by classifier-scored pair pruning.

    fit() ingests the entity profiles and ground truth, builds the blocks and
    the trained model; predict() returns the retained candidate pairs.
    """

    def __init__(
        self,
        algorithm: str = "blast",
        feature_set: Optional[FeatureSet] = None,
        per_class: int = 25,
        seed: int = 0,
        blast_ratio: float = 0.35,
        filter_ratio: float = 0.20,
    ):
        self.algorithm = algorithm
        self.feature_set = feature_set
        self.per_class = per_class
        self.seed = seed
        self.blast_ratio = blast_ratio
        self.filter_ratio = filter_ratio

    def _resolved_features(self, algorithm: PruningAlgorithm) -> FeatureSet:
        if self.feature_set is not None:
            return self.feature_set
        return RCNP_SET if algorithm is PruningAlgorithm.RCNP else BLAST_SET

    def fit(
        self,
        profiles_e1: list[EntityProfile],
        profiles_e2: Optional[list[EntityProfile]] = None,
        ground_truth: Optional[GroundTruth] = None,
    ):
        if ground_truth is None:
            raise ValueError("ground truth is required to train the classifier")
        algorithm = PruningAlgorithm(self.algorithm)
        fs = self._resolved_features(algorithm)
        total = len(profiles_e1) + len(profiles_e2 or ())

        phases: dict[str, float] = {}
        start = time.perf_counter()
        bc = blocking.pipeline_blocks(profiles_e1, profiles_e2, self.filter_ratio)
        candidates = blocking.extract_candidates(bc)
        phases["blocking"] = time.perf_counter() - start

        start = time.perf_counter()
        featured = featurize(candidates, bc, fs)
        phases["featurize"] = time.perf_counter() - start

        start = time.perf_counter()
        training_set = sample_training(featured, ground_truth, self.per_class, self.seed)
        model = train(training_set, fs)
        phases["train"] = time.perf_counter() - start

        self.block_collection_ = bc
        self.candidates_ = featured
        self.model_ = model
        self.ground_truth_ = ground_truth
        self.pruning_config_ = PruningConfig.from_collection(
            algorithm, bc, total, self.blast_ratio
        )
        self.phases_ = phases
        return self

    def predict(self) -> set[CandidatePair]:
        start = time.perf_counter()
        scored = score_pairs(self.model_, self.candidates_)
        self.phases_["predict"] = time.perf_counter() - start

        start = time.perf_counter()
        retained = prune(scored, self.pruning_config_)
        self.phases_["prune"] = time.perf_counter() - start
        self.scored_ = scored
        return retained

    transform = predict

    def report(self, retained: set[CandidatePair]) -> EvaluationReport:
        elapsed = sum(
            self.phases_.get(p, 0.0) for p in ("featurize", "train", "predict", "prune")
        )
        return evaluate(retained, self.candidates_, self.ground_truth_, elapsed)


@dataclass
class PipelineConfig:
    """File-level configuration mirroring the CLI flags."""

    e1: Optional[str] = None
    e2: Optional[str] = None
    dirty: Optional[str] = None
    gt: str = ""
    fmt: str = "csv"
    key_column: str = "id"
    algorithm: str = "blast"
    features: Optional[str] = None
    per_class: Optional[int] = 25
    seed: int = 0
    blast_ratio: float = 0.35
    filter_ratio: float = 0.20
    report: Optional[str] = None
    model_out: Optional[str] = None
    retained_out: Optional[str] = None
    export_density: Optional[str] = None
    export_block_dist: Optional[str] = None
    subset_search: bool = False
    training_sweep: bool = False
    sweep_sizes: tuple[int, ...] = (20, 50, 100, 150, 200, 250, 300, 350, 400, 450, 500)
    seeds: tuple[int, ...] = tuple(range(10))


def _load_profiles(config: PipelineConfig):
    if config.dirty:
        if config.e1 or config.e2:
            raise DataError("--dirty cannot be combined with --e1/--e2")
        profiles, key_map = ingest(
            config.dirty, config.fmt, Source.DIRTY, config.key_column
        )
        return profiles, None, key_map, key_map
    if not config.e1 or not config.e2:
        raise DataError("Clean-Clean mode needs both --e1 and --e2")
    profiles_e1, key_map_1 = ingest(config.e1, config.fmt, Source.E1, config.key_column)
    profiles_e2, key_map_2 = ingest(
        config.e2, config.fmt, Source.E2, config.key_column, id_offset=len(profiles_e1)
    )
    return profiles_e1, profiles_e2, key_map_1, key_map_2


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute the configured pipeline; returns the result payload that is
    also written to the report file when one is requested."""
    profiles_e1, profiles_e2, key_map_1, key_map_2 = _load_profiles(config)
    gt = read_ground_truth(config.gt, key_map_1, key_map_2)

    fs = parse_feature_names(config.features) if config.features else None
    per_class = config.per_class
    if per_class is None:
        per_class = max(1, math.floor(0.05 * len(gt)))

    blocker = GeneralizedMetaBlocker(
        algorithm=config.algorithm,
        feature_set=fs,
        per_class=per_class,
        seed=config.seed,
        blast_ratio=config.blast_ratio,
        filter_ratio=config.filter_ratio,
    )
    blocker.fit(profiles_e1, profiles_e2, ground_truth=gt)
    retained = blocker.predict()
    report = blocker.report(retained)

    payload: dict = {
        "config": {
            "algorithm": config.algorithm,
            "features": [f.value for f in blocker.model_.feature_set.features],
            "per_class": per_class,
            "seed": config.seed,
            "blast_ratio": config.blast_ratio,
            "filter_ratio": config.filter_ratio,
        },
        "report": report.__dict__,
        "phase_seconds": blocker.phases_,
    }

    total = len(profiles_e1) + len(profiles_e2 or ())
    if config.subset_search:
        ranked = feature_subset_search(
            blocker.candidates_,
            blocker.block_collection_,
            gt,
            PruningAlgorithm(config.algorithm),
            per_class,
            config.seeds,
            total,
            config.blast_ratio,
        )
        payload["subset_search"] = [
            {"features": [f.value for f in fs.features], "report": rep.__dict__}
            for fs, rep in ranked
        ]
    if config.training_sweep:
        table = training_sweep(
            blocker.candidates_,
            blocker.block_collection_,
            gt,
            PruningAlgorithm(config.algorithm),
            config.sweep_sizes,
            config.seeds,
            feature_set=fs,
            total_entities=total,
            blast_ratio=config.blast_ratio,
        )
        payload["training_sweep"] = [
            {"size": size, "report": rep.__dict__} for size, rep in table
        ]

    if config.report:
        Path(config.report).write_text(
            _payload_json(payload), encoding="utf-8"
        )
    if config.model_out:
        Path(config.model_out).write_text(blocker.model_.to_json(), encoding="utf-8")
    if config.retained_out:
        with open(config.retained_out, "w", newline="", encoding="utf-8") as fh:
            write_retained_csv(retained, fh)
    if config.export_density:
        with open(config.export_density, "w", newline="", encoding="utf-8") as fh:
            export_probability_density(blocker.scored_, gt, fh)
    if config.export_block_dist:
        with open(config.export_block_dist, "w", newline="", encoding="utf-8") as fh:
            export_common_block_distribution(blocker.block_collection_, gt, fh)
    return payload


def _payload_json(payload: dict) -> str:
    import json

    return json.dumps(payload, indent=2, sort_keys=True)
