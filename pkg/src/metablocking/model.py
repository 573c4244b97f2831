"""Core domain types shared by the blocking, weighting and pruning stages.

All types are immutable after construction and safe to share across threads.
Entity ids are dense ordinals assigned at ingestion; in Clean-Clean mode the
ids of the second collection continue after the first one, so the canonical
pair ordering i < j also guarantees that i belongs to E1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional


class Source(enum.Enum):
    """Origin of an entity profile."""

    E1 = "e1"
    E2 = "e2"
    DIRTY = "dirty"


class Label(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class EntityProfile:
    """An identified set of attribute name/value text pairs.

    Attributes may be empty; names and values may repeat.
    """

    id: int
    source: Source
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class GroundTruth:
    """The known set of duplicate pairs, stored in canonical (i < j) order."""

    matches: frozenset[tuple[int, int]]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "GroundTruth":
        canonical = set()
        for i, j in pairs:
            if i == j:
                raise ValueError(f"self-pair ({i}, {j}) is not a valid duplicate")
            canonical.add((i, j) if i < j else (j, i))
        return cls(frozenset(canonical))

    def __contains__(self, pair: tuple[int, int]) -> bool:
        i, j = pair
        return ((i, j) if i < j else (j, i)) in self.matches

    def __len__(self) -> int:
        return len(self.matches)


class CandidatePair:
    """A distinct cross-entity comparison.

    Equality and hashing consider only the canonical (i, j) identity, so a
    scored pair and its unscored counterpart collapse to one set element.
    """

    __slots__ = ("i", "j", "features", "probability")

    def __init__(
        self,
        i: int,
        j: int,
        features: Optional[tuple[float, ...]] = None,
        probability: Optional[float] = None,
    ):
        if i >= j:
            i, j = j, i
        if probability is not None and not (0.0 <= probability <= 1.0):
            raise ValueError(f"probability {probability} outside [0, 1]")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "probability", probability)

    def __setattr__(self, name, value):
        raise AttributeError("CandidatePair is immutable")

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j)

    def with_features(self, features: tuple[float, ...]) -> "CandidatePair":
        return CandidatePair(self.i, self.j, features, self.probability)

    def with_probability(self, probability: float) -> "CandidatePair":
        return CandidatePair(self.i, self.j, self.features, probability)

    def __eq__(self, other) -> bool:
        return isinstance(other, CandidatePair) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"CandidatePair({self.i}, {self.j}, p={self.probability})"


def label(pair: CandidatePair, gt: GroundTruth) -> Label:
    """Classify a candidate pair against the ground truth."""
    return Label.POSITIVE if pair.key in gt else Label.NEGATIVE


@dataclass(frozen=True)
class Block:
    """A signature-keyed block of entity ids.

    In Dirty mode all members live in ``members_e1`` and ``members_e2`` stays
    empty; the cardinality formula switches accordingly.
    """

    signature: str
    members_e1: tuple[int, ...]
    members_e2: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return len(self.members_e1) + len(self.members_e2)

    @property
    def cardinality(self) -> int:
        """Total number of candidate pairs inside the block."""
        if self.members_e2:
            return len(self.members_e1) * len(self.members_e2)
        n = len(self.members_e1)
        return n * (n - 1) // 2

    def members(self) -> tuple[int, ...]:
        return self.members_e1 + self.members_e2


@dataclass(frozen=True)
class BlockStats:
    """Aggregates cached on a block collection."""

    num_blocks: int
    sum_sizes: int
    total_cardinality: int
    blocks_per_entity: dict[int, int]
    cardinality_per_entity: dict[int, int]


def compute_stats(blocks: tuple[Block, ...]) -> BlockStats:
    blocks_per_entity: dict[int, int] = {}
    cardinality_per_entity: dict[int, int] = {}
    sum_sizes = 0
    total_cardinality = 0
    for b in blocks:
        sum_sizes += b.size
        card = b.cardinality
        total_cardinality += card
        for e in b.members():
            blocks_per_entity[e] = blocks_per_entity.get(e, 0) + 1
            cardinality_per_entity[e] = cardinality_per_entity.get(e, 0) + card
    return BlockStats(
        num_blocks=len(blocks),
        sum_sizes=sum_sizes,
        total_cardinality=total_cardinality,
        blocks_per_entity=blocks_per_entity,
        cardinality_per_entity=cardinality_per_entity,
    )


@dataclass(frozen=True)
class BlockCollection:
    """Blocks plus the per-entity inverted index and cached size statistics."""

    blocks: tuple[Block, ...]
    dirty: bool
    entity_index: dict[int, tuple[int, ...]] = field(repr=False, default_factory=dict)
    stats: BlockStats = field(repr=False, default=None)  # type: ignore[assignment]

    @classmethod
    def build(cls, blocks: Iterable[Block], dirty: bool) -> "BlockCollection":
        blocks = tuple(blocks)
        index: dict[int, list[int]] = {}
        for pos, b in enumerate(blocks):
            for e in b.members():
                index.setdefault(e, []).append(pos)
        entity_index = {e: tuple(ps) for e, ps in index.items()}
        return cls(
            blocks=blocks,
            dirty=dirty,
            entity_index=entity_index,
            stats=compute_stats(blocks),
        )

    def entity_blocks(self, entity: int) -> tuple[int, ...]:
        return self.entity_index.get(entity, ())

    @cached_property
    def entity_block_sets(self) -> dict[int, frozenset[int]]:
        return {e: frozenset(ps) for e, ps in self.entity_index.items()}

    @cached_property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.blocks)

    @cached_property
    def block_cardinalities(self) -> tuple[int, ...]:
        return tuple(b.cardinality for b in self.blocks)

    def is_cross_source(self, i: int, j: int) -> bool:
        """True when the pair joins both sources (always true in Dirty mode)."""
        if self.dirty:
            return True
        e1_members = self._e1_members
        return (i in e1_members) != (j in e1_members)

    @cached_property
    def _e1_members(self) -> frozenset[int]:
        out: set[int] = set()
        for b in self.blocks:
            out.update(b.members_e1)
        return frozenset(out)
