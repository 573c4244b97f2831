"""Dataset ingestion: CSV / JSON-lines profiles and ground-truth files."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

from .model import EntityProfile, GroundTruth, Source


class DataError(Exception):
    """Malformed or inconsistent input data."""


def ingest(
    path: str | Path,
    fmt: str,
    source: Source,
    key_column: str = "id",
    id_offset: int = 0,
) -> tuple[list[EntityProfile], dict[str, int]]:
    """Read one profile per row/record.

    All columns except the key column become name-value attributes; empty or
    null values are skipped. Returns the profiles plus the sidecar map from
    original record keys to the assigned dense ids.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    if fmt == "csv":
        records = _read_csv(path, key_column)
    elif fmt == "jsonl":
        records = _read_jsonl(path, key_column)
    else:
        raise DataError(f"unsupported format {fmt!r}; expected 'csv' or 'jsonl'")

    profiles: list[EntityProfile] = []
    key_map: dict[str, int] = {}
    for key, attributes in records:
        if key in key_map:
            raise DataError(f"duplicate record key {key!r} in {path}")
        entity_id = id_offset + len(profiles)
        key_map[key] = entity_id
        profiles.append(EntityProfile(entity_id, source, tuple(attributes)))
    return profiles, key_map


def _read_csv(path: Path, key_column: str):
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or key_column not in reader.fieldnames:
            raise DataError(f"missing key column {key_column!r} in {path}")
        for row_num, row in enumerate(reader, start=2):
            key = row.get(key_column)
            if key is None or key == "":
                raise DataError(f"{path}:{row_num}: empty key")
            attributes = [
                (name, value)
                for name, value in row.items()
                if name != key_column and value
            ]
            yield key, attributes


def _read_jsonl(path: Path, key_column: str):
    with path.open(encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_num}: invalid JSON: {exc}") from exc
            if key_column not in record:
                raise DataError(f"{path}:{line_num}: missing key {key_column!r}")
            key = str(record[key_column])
            attributes = [
                (name, str(value))
                for name, value in record.items()
                if name != key_column and value is not None and value != ""
            ]
            yield key, attributes


def read_ground_truth(
    path: str | Path,
    key_map_a: dict[str, int],
    key_map_b: Optional[dict[str, int]] = None,
) -> GroundTruth:
    """Two-column CSV of record keys; second column resolves against the
    second collection in Clean-Clean mode."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"ground-truth file not found: {path}")
    key_map_b = key_map_b if key_map_b is not None else key_map_a
    pairs: list[tuple[int, int]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DataError(f"ground truth {path} needs a two-column header")
        for row_num, row in enumerate(reader, start=2):
            if len(row) < 2:
                raise DataError(f"{path}:{row_num}: expected two columns")
            key_a, key_b = row[0], row[1]
            if key_a not in key_map_a:
                raise DataError(f"{path}:{row_num}: unknown key {key_a!r}")
            if key_b not in key_map_b:
                raise DataError(f"{path}:{row_num}: unknown key {key_b!r}")
            pairs.append((key_map_a[key_a], key_map_b[key_b]))
    try:
        return GroundTruth.from_pairs(pairs)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
