"""Effectiveness measurement, feature-subset search, sweeps and exports."""

from __future__ import annotations

import csv
import io
import itertools
import json
import time
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

import numpy as np

from .classifier import sample_training, score_pairs, train
from .model import BlockCollection, CandidatePair, GroundTruth
from .pruning import PruningAlgorithm, PruningConfig, prune
from .weighting import ALL_FEATURES, FeatureId, FeatureSet, feature_vector

DENSITY_BUCKET_WIDTH = 0.01
DEFAULT_SEEDS = tuple(range(10))


@dataclass(frozen=True)
class EvaluationReport:
    tp: int
    fp: int
    tn: int
    fn: int
    recall: float
    precision: float
    f1: float
    runtime_seconds: float
    candidates_in: int
    candidates_out: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def evaluate(
    retained: Iterable[CandidatePair],
    candidates: Iterable[CandidatePair],
    gt: GroundTruth,
    elapsed: float = 0.0,
) -> EvaluationReport:
    """Count outcomes against the ground truth.

    The recall denominator is the full duplicate set, so duplicates that were
    never blocked count as misses.
    """
    retained_keys = {c.key for c in retained}
    candidate_keys = {c.key for c in candidates}
    duplicates = gt.matches
    tp = len(retained_keys & duplicates)
    fp = len(retained_keys) - tp
    fn = len(duplicates) - tp
    discarded = candidate_keys - retained_keys
    tn = len(discarded) - len(discarded & duplicates)
    recall = tp / len(duplicates) if duplicates else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    f1 = 2 * recall * precision / (recall + precision) if recall + precision else 0.0
    return EvaluationReport(
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        recall=recall,
        precision=precision,
        f1=f1,
        runtime_seconds=elapsed,
        candidates_in=len(candidate_keys),
        candidates_out=len(retained_keys),
    )


def speedup(
    ct_small: int, rt_small: float, ct_large: int, rt_large: float
) -> float:
    """Extrapolated throughput ratio; 1.0 means perfectly linear scaling."""
    return (ct_large / ct_small) * (rt_small / rt_large)


def _mean_report(reports: Sequence[EvaluationReport]) -> EvaluationReport:
    # F1 is averaged per run, not recomputed from mean recall/precision
    n = len(reports)
    return EvaluationReport(
        tp=round(sum(r.tp for r in reports) / n),
        fp=round(sum(r.fp for r in reports) / n),
        tn=round(sum(r.tn for r in reports) / n),
        fn=round(sum(r.fn for r in reports) / n),
        recall=sum(r.recall for r in reports) / n,
        precision=sum(r.precision for r in reports) / n,
        f1=sum(r.f1 for r in reports) / n,
        runtime_seconds=sum(r.runtime_seconds for r in reports) / n,
        candidates_in=round(sum(r.candidates_in for r in reports) / n),
        candidates_out=round(sum(r.candidates_out for r in reports) / n),
    )


def _full_feature_matrix(
    pairs: Sequence[CandidatePair], bc: BlockCollection
) -> tuple[np.ndarray, dict[FeatureId, tuple[int, ...]]]:
    """Evaluate every scheme once; subsets then select columns."""
    full_set = FeatureSet(ALL_FEATURES)
    matrix = np.array(
        [feature_vector(p, bc, full_set) for p in pairs], dtype=float
    )
    columns: dict[FeatureId, tuple[int, ...]] = {}
    col = 0
    for f in full_set.features:
        width = 2 if f is FeatureId.LCP else 1
        columns[f] = tuple(range(col, col + width))
        col += width
    return matrix, columns


def _run_once(
    pairs: Sequence[CandidatePair],
    vectors: np.ndarray,
    gt: GroundTruth,
    fs: FeatureSet,
    algorithm: PruningAlgorithm,
    config: PruningConfig,
    per_class: int,
    seed: int,
) -> EvaluationReport:
    start = time.perf_counter()
    featured = [p.with_features(tuple(v)) for p, v in zip(pairs, vectors)]
    ts = sample_training(featured, gt, per_class, seed)
    model = train(ts, fs)
    scored = score_pairs(model, featured)
    retained = prune(scored, config)
    elapsed = time.perf_counter() - start
    return evaluate(retained, featured, gt, elapsed)


def feature_subset_search(
    candidates: Iterable[CandidatePair],
    bc: BlockCollection,
    gt: GroundTruth,
    algorithm: PruningAlgorithm,
    per_class: int,
    seeds: Sequence[int],
    total_entities: int,
    blast_ratio: float = 0.35,
) -> list[tuple[FeatureSet, EvaluationReport]]:
    """Evaluate all 255 non-empty feature subsets, averaged over seeds.

    Ranked by F1 descending; ties are broken by subset enumeration order
    (smaller subsets first) so the ranking is reproducible across runs.
    Measured runtimes are reported but never rank, since wall-clock noise
    would make equal-F1 orderings unstable.
    """
    if not seeds:
        raise ValueError("at least one seed is required")
    pairs = sorted(candidates, key=lambda p: p.key)
    matrix, columns = _full_feature_matrix(pairs, bc)
    config = PruningConfig.from_collection(algorithm, bc, total_entities, blast_ratio)

    results: list[tuple[int, FeatureSet, EvaluationReport]] = []
    index = 0
    for size in range(1, len(ALL_FEATURES) + 1):
        for combo in itertools.combinations(ALL_FEATURES, size):
            fs = FeatureSet(combo)
            cols = [c for f in combo for c in columns[f]]
            sub = matrix[:, cols]
            reports = [
                _run_once(pairs, sub, gt, fs, algorithm, config, per_class, seed)
                for seed in seeds
            ]
            results.append((index, fs, _mean_report(reports)))
            index += 1
    results.sort(key=lambda r: (-r[2].f1, r[0]))
    return [(fs, report) for _, fs, report in results]


def training_sweep(
    candidates: Iterable[CandidatePair],
    bc: BlockCollection,
    gt: GroundTruth,
    algorithm: PruningAlgorithm,
    sizes: Sequence[int],
    seeds: Sequence[int] = DEFAULT_SEEDS,
    feature_set: FeatureSet | None = None,
    total_entities: int = 0,
    blast_ratio: float = 0.35,
) -> list[tuple[int, EvaluationReport]]:
    """One mean report per training-set size (size = total labelled pairs)."""
    from .weighting import BLAST_SET, RCNP_SET

    if feature_set is None:
        feature_set = RCNP_SET if algorithm is PruningAlgorithm.RCNP else BLAST_SET
    pairs = sorted(candidates, key=lambda p: p.key)
    matrix = np.array(
        [feature_vector(p, bc, feature_set) for p in pairs], dtype=float
    )
    config = PruningConfig.from_collection(algorithm, bc, total_entities, blast_ratio)
    table = []
    for size in sizes:
        per_class = size // 2
        reports = [
            _run_once(pairs, matrix, gt, feature_set, algorithm, config, per_class, seed)
            for seed in seeds
        ]
        table.append((size, _mean_report(reports)))
    return table


def probability_density(
    scored: Iterable[CandidatePair],
    gt: GroundTruth,
    bucket_width: float = DENSITY_BUCKET_WIDTH,
) -> tuple[list[tuple[float, int, int]], float, float]:
    """Histogram of probabilities split by matching status.

    Returns (rows, mean_node_threshold, max_node_threshold) where the two
    thresholds average the per-entity mean and per-entity maximum valid
    probability across all entities, mirroring the per-node pruning criteria.
    """
    scored = list(scored)
    n_buckets = round(1.0 / bucket_width)
    matching = [0] * (n_buckets + 1)
    other = [0] * (n_buckets + 1)
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    maxima: dict[int, float] = {}
    for c in scored:
        p = c.probability
        bucket = min(int(p / bucket_width), n_buckets)
        if c.key in gt:
            matching[bucket] += 1
        else:
            other[bucket] += 1
        if p >= 0.5:
            for e in (c.i, c.j):
                sums[e] = sums.get(e, 0.0) + p
                counts[e] = counts.get(e, 0) + 1
                maxima[e] = max(maxima.get(e, 0.0), p)
    rows = [
        (round(b * bucket_width, 10), matching[b], other[b])
        for b in range(n_buckets + 1)
        if matching[b] or other[b]
    ]
    mean_threshold = (
        sum(sums[e] / counts[e] for e in sums) / len(sums) if sums else 0.0
    )
    max_threshold = sum(maxima.values()) / len(maxima) if maxima else 0.0
    return rows, mean_threshold, max_threshold


def export_probability_density(
    scored: Iterable[CandidatePair],
    gt: GroundTruth,
    fileobj: io.TextIOBase,
    bucket_width: float = DENSITY_BUCKET_WIDTH,
) -> None:
    rows, mean_threshold, max_threshold = probability_density(scored, gt, bucket_width)
    writer = csv.writer(fileobj)
    writer.writerow(["bucket", "matching", "non_matching"])
    for row in rows:
        writer.writerow(row)
    writer.writerow(["mean_node_threshold", repr(mean_threshold), ""])
    writer.writerow(["max_node_threshold", repr(max_threshold), ""])


def common_block_distribution(
    bc: BlockCollection, gt: GroundTruth
) -> list[tuple[int, float]]:
    """Fraction of ground-truth duplicates per shared-block count.

    x = 0 collects the duplicates missed by blocking; fractions sum to 1.
    """
    if not gt.matches:
        return []
    block_sets = bc.entity_block_sets
    counts: dict[int, int] = {}
    for i, j in gt.matches:
        common = len(block_sets.get(i, frozenset()) & block_sets.get(j, frozenset()))
        counts[common] = counts.get(common, 0) + 1
    total = len(gt.matches)
    return [(x, counts[x] / total) for x in sorted(counts)]


def export_common_block_distribution(
    bc: BlockCollection, gt: GroundTruth, fileobj: io.TextIOBase
) -> None:
    writer = csv.writer(fileobj)
    writer.writerow(["common_blocks", "duplicate_fraction"])
    for x, fraction in common_block_distribution(bc, gt):
        writer.writerow([x, repr(fraction)])
