"""Schema-agnostic co-occurrence weighting schemes used as pair features.

All schemes read only the cached block-collection statistics. Logarithms are
natural; whenever a log argument would be degenerate (an entity indexed in no
block, or carrying the whole collection's comparisons) the scheme returns 0,
since such a pair cannot co-occur meaningfully anyway.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

from .model import BlockCollection, CandidatePair


class FeatureId(enum.Enum):
    CF_IBF = "cf-ibf"
    RACCB = "raccb"
    JS = "js"
    LCP = "lcp"  # expands to two vector slots, one per constituent entity
    EJS = "ejs"
    WJS = "wjs"
    RS = "rs"
    NRS = "nrs"


ALL_FEATURES: tuple[FeatureId, ...] = tuple(FeatureId)


@dataclass(frozen=True)
class FeatureSet:
    """An ordered, duplicate-free selection of weighting schemes."""

    features: tuple[FeatureId, ...]

    def __post_init__(self):
        if not self.features:
            raise ValueError("feature set must not be empty")
        if len(set(self.features)) != len(self.features):
            raise ValueError(f"duplicate feature ids in {self.features}")

    @property
    def dimension(self) -> int:
        return len(self.features) + (1 if FeatureId.LCP in self.features else 0)

    def slot_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for f in self.features:
            if f is FeatureId.LCP:
                names.extend(("lcp_i", "lcp_j"))
            else:
                names.append(f.value)
        return tuple(names)


BLAST_SET = FeatureSet((FeatureId.CF_IBF, FeatureId.RACCB, FeatureId.RS, FeatureId.NRS))
RCNP_SET = FeatureSet(
    (FeatureId.CF_IBF, FeatureId.RACCB, FeatureId.JS, FeatureId.LCP, FeatureId.WJS)
)
LEGACY_SET = FeatureSet(
    (FeatureId.CF_IBF, FeatureId.RACCB, FeatureId.JS, FeatureId.LCP)
)


class SchemeEngine:
    """Per-collection caches backing the weighting schemes.

    Construction performs one sweep over the blocks; afterwards every scheme
    is a pure per-pair lookup, safe to evaluate in parallel.
    """

    def __init__(self, bc: BlockCollection):
        self.bc = bc
        self.num_blocks = len(bc.blocks)
        self.block_sets = bc.entity_block_sets
        self.sizes = bc.block_sizes
        self.cards = bc.block_cardinalities
        self.total_cardinality = bc.stats.total_cardinality
        self.entity_cardinality = bc.stats.cardinality_per_entity
        self.inv_card_sum = {
            e: sum(1.0 / self.cards[p] for p in ps if self.cards[p] > 0)
            for e, ps in bc.entity_index.items()
        }
        self.inv_size_sum = {
            e: sum(1.0 / self.sizes[p] for p in ps if self.sizes[p] > 0)
            for e, ps in bc.entity_index.items()
        }
        self._lcp_cache: dict[int, int] | None = None

    def blocks_of(self, entity: int) -> frozenset[int]:
        return self.block_sets.get(entity, frozenset())

    def common_blocks(self, i: int, j: int) -> frozenset[int]:
        return self.blocks_of(i) & self.blocks_of(j)

    def lcp(self, entity: int) -> int:
        """Distinct co-occurring entities (cross-source only in Clean-Clean)."""
        if self._lcp_cache is None:
            counts: dict[int, set[int]] = {e: set() for e in self.bc.entity_index}
            for b in self.bc.blocks:
                if self.bc.dirty:
                    members = b.members_e1
                    for e in members:
                        counts[e].update(members)
                else:
                    for e in b.members_e1:
                        counts[e].update(b.members_e2)
                    for e in b.members_e2:
                        counts[e].update(b.members_e1)
            for e, neighbors in counts.items():
                neighbors.discard(e)
            self._lcp_cache = {e: len(n) for e, n in counts.items()}
        return self._lcp_cache.get(entity, 0)


_engines: dict[int, SchemeEngine] = {}


def _engine(bc: BlockCollection) -> SchemeEngine:
    # keyed on object identity; collections are immutable
    eng = _engines.get(id(bc))
    if eng is None or eng.bc is not bc:
        eng = SchemeEngine(bc)
        _engines.clear()
        _engines[id(bc)] = eng
    return eng


def cf_ibf(pair: CandidatePair, bc: BlockCollection) -> float:
    eng = _engine(bc)
    bi, bj = eng.blocks_of(pair.i), eng.blocks_of(pair.j)
    common = len(bi & bj)
    if common == 0 or not bi or not bj:
        return 0.0
    return common * math.log(eng.num_blocks / len(bi)) * math.log(eng.num_blocks / len(bj))


def raccb(pair: CandidatePair, bc: BlockCollection) -> float:
    eng = _engine(bc)
    return sum(1.0 / eng.cards[p] for p in eng.common_blocks(pair.i, pair.j) if eng.cards[p] > 0)


def js(pair: CandidatePair, bc: BlockCollection) -> float:
    eng = _engine(bc)
    bi, bj = eng.blocks_of(pair.i), eng.blocks_of(pair.j)
    common = len(bi & bj)
    union = len(bi) + len(bj) - common
    return common / union if union else 0.0


def lcp(entity: int, bc: BlockCollection) -> int:
    return _engine(bc).lcp(entity)


def ejs(pair: CandidatePair, bc: BlockCollection) -> float:
    eng = _engine(bc)
    jaccard = js(pair, bc)
    if jaccard == 0.0:
        return 0.0
    ei = eng.entity_cardinality.get(pair.i, 0)
    ej = eng.entity_cardinality.get(pair.j, 0)
    if ei == 0 or ej == 0:
        return 0.0
    total = eng.total_cardinality
    return jaccard * math.log(total / ei) * math.log(total / ej)


def wjs(pair: CandidatePair, bc: BlockCollection) -> float:
    eng = _engine(bc)
    num = raccb(pair, bc)
    if num == 0.0:
        return 0.0
    denom = eng.inv_card_sum.get(pair.i, 0.0) + eng.inv_card_sum.get(pair.j, 0.0) - num
    return num / denom if denom else 0.0


def rs(pair: CandidatePair, bc: BlockCollection) -> float:
    eng = _engine(bc)
    return sum(1.0 / eng.sizes[p] for p in eng.common_blocks(pair.i, pair.j) if eng.sizes[p] > 0)


def nrs(pair: CandidatePair, bc: BlockCollection) -> float:
    eng = _engine(bc)
    num = rs(pair, bc)
    if num == 0.0:
        return 0.0
    denom = eng.inv_size_sum.get(pair.i, 0.0) + eng.inv_size_sum.get(pair.j, 0.0) - num
    return num / denom if denom else 0.0


_SCHEME_FUNCS = {
    FeatureId.CF_IBF: cf_ibf,
    FeatureId.RACCB: raccb,
    FeatureId.JS: js,
    FeatureId.EJS: ejs,
    FeatureId.WJS: wjs,
    FeatureId.RS: rs,
    FeatureId.NRS: nrs,
}


def feature_vector(
    pair: CandidatePair, bc: BlockCollection, fs: FeatureSet
) -> tuple[float, ...]:
    values: list[float] = []
    for f in fs.features:
        if f is FeatureId.LCP:
            values.append(float(lcp(pair.i, bc)))
            values.append(float(lcp(pair.j, bc)))
        else:
            values.append(float(_SCHEME_FUNCS[f](pair, bc)))
    return tuple(values)


def featurize(
    pairs: Iterable[CandidatePair], bc: BlockCollection, fs: FeatureSet
) -> list[CandidatePair]:
    """Populate feature vectors, returning pairs in canonical id order."""
    ordered = sorted(pairs, key=lambda p: p.key)
    return [p.with_features(feature_vector(p, bc, fs)) for p in ordered]
