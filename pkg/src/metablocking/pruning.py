"""Pruning algorithms that consume classifier probabilities.

Valid pairs are those with probability >= 0.5; comparisons against thresholds
are inclusive. Ties at equal probability are broken by canonical pair id,
with the smaller id ranked lower (evicted first from bounded queues), so
every algorithm's output is deterministic and independent of input order.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import BlockCollection, CandidatePair

VALID_THRESHOLD = 0.5


class PruningAlgorithm(enum.Enum):
    BCL = "bcl"
    WEP = "wep"
    WNP = "wnp"
    RWNP = "rwnp"
    BLAST = "blast"
    CEP = "cep"
    CNP = "cnp"
    RCNP = "rcnp"


WEIGHT_BASED = {
    PruningAlgorithm.BCL,
    PruningAlgorithm.WEP,
    PruningAlgorithm.WNP,
    PruningAlgorithm.RWNP,
    PruningAlgorithm.BLAST,
}


@dataclass(frozen=True)
class PruningConfig:
    """Algorithm choice plus the thresholds derived from the block collection.

    K is half the sum of block sizes; k is the average number of blocks per
    entity, floored, with a minimum of 1.
    """

    algorithm: PruningAlgorithm
    blast_ratio: float = 0.35
    K: int = 0
    k: int = 1

    @classmethod
    def from_collection(
        cls,
        algorithm: PruningAlgorithm,
        bc: BlockCollection,
        total_entities: int,
        blast_ratio: float = 0.35,
    ) -> "PruningConfig":
        if not 0 < blast_ratio <= 1:
            raise ValueError(f"blast ratio must be in (0, 1], got {blast_ratio}")
        sum_sizes = bc.stats.sum_sizes
        return cls(
            algorithm=algorithm,
            blast_ratio=blast_ratio,
            K=sum_sizes // 2,
            k=max(1, sum_sizes // total_entities) if total_entities else 1,
        )


def _rank(pair: CandidatePair) -> tuple[float, int, int]:
    # total order: lower probability first, then smaller canonical pair id
    return (pair.probability, pair.i, pair.j)


def _valid(scored: Iterable[CandidatePair]) -> list[CandidatePair]:
    return [c for c in scored if c.probability is not None and c.probability >= VALID_THRESHOLD]


def bcl(scored: Iterable[CandidatePair]) -> set[CandidatePair]:
    """Baseline binary classifier: retain every valid pair."""
    return set(_valid(scored))


def wep(scored: Iterable[CandidatePair]) -> set[CandidatePair]:
    """Global average-probability threshold over the valid pairs."""
    scored = list(scored)
    valid = _valid(scored)
    if not valid:
        return set()
    # fsum keeps the threshold independent of input order
    mean_p = math.fsum(c.probability for c in valid) / len(valid)
    return {c for c in scored if c.probability is not None and c.probability >= mean_p}


def _per_entity_means(valid: Sequence[CandidatePair]) -> dict[int, float]:
    probs: dict[int, list[float]] = {}
    for c in valid:
        for e in (c.i, c.j):
            probs.setdefault(e, []).append(c.probability)
    # fsum keeps the thresholds independent of input order
    return {e: math.fsum(ps) / len(ps) for e, ps in probs.items()}


def wnp(scored: Iterable[CandidatePair]) -> set[CandidatePair]:
    """Per-entity average threshold; a pair survives via either entity."""
    valid = _valid(scored)
    means = _per_entity_means(valid)
    return {
        c
        for c in valid
        if c.probability >= means[c.i] or c.probability >= means[c.j]
    }


def rwnp(scored: Iterable[CandidatePair]) -> set[CandidatePair]:
    """As WNP but the pair must beat both per-entity averages."""
    valid = _valid(scored)
    means = _per_entity_means(valid)
    return {
        c
        for c in valid
        if c.probability >= means[c.i] and c.probability >= means[c.j]
    }


def blast(scored: Iterable[CandidatePair], r: float = 0.35) -> set[CandidatePair]:
    """Retain valid pairs scoring at least r times the sum of the maximum
    valid probabilities of their two entities."""
    valid = _valid(scored)
    maxima: dict[int, float] = {}
    for c in valid:
        for e in (c.i, c.j):
            if c.probability > maxima.get(e, 0.0):
                maxima[e] = c.probability
    return {
        c for c in valid if c.probability >= r * (maxima[c.i] + maxima[c.j])
    }


def cep(scored: Iterable[CandidatePair], K: int) -> set[CandidatePair]:
    """Global top-K valid pairs by probability."""
    valid = _valid(scored)
    return set(sorted(valid, key=_rank, reverse=True)[:K])


def _entity_queues(
    valid: Sequence[CandidatePair], k: int
) -> dict[int, set[tuple[int, int]]]:
    by_entity: dict[int, list[CandidatePair]] = {}
    for c in valid:
        by_entity.setdefault(c.i, []).append(c)
        by_entity.setdefault(c.j, []).append(c)
    return {
        e: {c.key for c in sorted(pairs, key=_rank, reverse=True)[:k]}
        for e, pairs in by_entity.items()
    }


def cnp(scored: Iterable[CandidatePair], k: int) -> set[CandidatePair]:
    """Per-entity top-k queues; a pair survives via either queue."""
    valid = _valid(scored)
    queues = _entity_queues(valid, k)
    return {c for c in valid if c.key in queues[c.i] or c.key in queues[c.j]}


def rcnp(scored: Iterable[CandidatePair], k: int) -> set[CandidatePair]:
    """As CNP but the pair must be in both entities' queues."""
    valid = _valid(scored)
    queues = _entity_queues(valid, k)
    return {c for c in valid if c.key in queues[c.i] and c.key in queues[c.j]}


def prune(scored: Iterable[CandidatePair], config: PruningConfig) -> set[CandidatePair]:
    alg = config.algorithm
    if alg is PruningAlgorithm.BCL:
        return bcl(scored)
    if alg is PruningAlgorithm.WEP:
        return wep(scored)
    if alg is PruningAlgorithm.WNP:
        return wnp(scored)
    if alg is PruningAlgorithm.RWNP:
        return rwnp(scored)
    if alg is PruningAlgorithm.BLAST:
        return blast(scored, config.blast_ratio)
    if alg is PruningAlgorithm.CEP:
        return cep(scored, config.K)
    if alg is PruningAlgorithm.CNP:
        return cnp(scored, config.k)
    if alg is PruningAlgorithm.RCNP:
        return rcnp(scored, config.k)
    raise ValueError(f"unknown pruning algorithm: {alg}")


def write_retained_csv(retained: Iterable[CandidatePair], fileobj: io.TextIOBase) -> None:
    """Export retained pairs, one row (and conceptually one new block) each."""
    writer = csv.writer(fileobj)
    writer.writerow(["id_i", "id_j", "probability"])
    for c in sorted(retained, key=lambda c: c.key):
        writer.writerow([c.i, c.j, repr(c.probability)])
