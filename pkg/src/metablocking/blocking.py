"""Redundancy-positive block building: token blocking, purging, filtering.

Tokenization rule: lowercase, split on any non-alphanumeric character,
discard empty tokens, keep pure-number tokens. Documented so benchmark
deltas against other pipelines are explainable.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Optional

from .model import Block, BlockCollection, CandidatePair, EntityProfile

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def profile_tokens(profile: EntityProfile) -> set[str]:
    tokens: set[str] = set()
    for _, value in profile.attributes:
        tokens.update(tokenize(value))
    return tokens


def token_blocking(
    profiles_e1: list[EntityProfile],
    profiles_e2: Optional[list[EntityProfile]] = None,
) -> BlockCollection:
    """One block per distinct token; a profile joins the block of every token
    it contains. In Clean-Clean mode, single-source blocks are dropped since
    they yield no candidates."""
    dirty = profiles_e2 is None
    index_e1: dict[str, list[int]] = {}
    index_e2: dict[str, list[int]] = {}
    for p in profiles_e1:
        for tok in sorted(profile_tokens(p)):
            index_e1.setdefault(tok, []).append(p.id)
    for p in profiles_e2 or ():
        for tok in sorted(profile_tokens(p)):
            index_e2.setdefault(tok, []).append(p.id)

    blocks = []
    for tok in sorted(set(index_e1) | set(index_e2)):
        m1 = tuple(sorted(index_e1.get(tok, ())))
        m2 = tuple(sorted(index_e2.get(tok, ())))
        if dirty:
            if len(m1) >= 2:
                blocks.append(Block(tok, m1))
        else:
            if m1 and m2:
                blocks.append(Block(tok, m1, m2))
    return BlockCollection.build(blocks, dirty)


def block_purging(bc: BlockCollection, total_entities: int) -> BlockCollection:
    """Drop blocks containing more than half of all entity profiles."""
    limit = total_entities / 2
    kept = tuple(b for b in bc.blocks if b.size <= limit)
    if len(kept) == len(bc.blocks):
        return bc
    return BlockCollection.build(kept, bc.dirty)


def block_filtering(bc: BlockCollection, ratio: float = 0.20) -> BlockCollection:
    """Remove each entity from the largest ``ratio`` share of its blocks.

    Per entity, blocks are ranked by size descending (signature ascending on
    ties) and the entity leaves the top ceil(ratio * |B_i|) of them, but never
    its last remaining block. Blocks left with fewer than two members, or with
    members from a single source in Clean-Clean mode, are dropped.
    """
    if not 0 <= ratio < 1:
        raise ValueError(f"ratio must be in [0, 1), got {ratio}")
    if ratio == 0:
        return bc

    removals: dict[int, set[int]] = {}
    for entity, positions in bc.entity_index.items():
        n_blocks = len(positions)
        n_remove = min(math.ceil(ratio * n_blocks), n_blocks - 1)
        if n_remove <= 0:
            continue
        ranked = sorted(
            positions,
            key=lambda pos: (-bc.blocks[pos].size, bc.blocks[pos].signature),
        )
        removals[entity] = set(ranked[:n_remove])

    new_blocks = []
    for pos, b in enumerate(bc.blocks):
        m1 = tuple(e for e in b.members_e1 if pos not in removals.get(e, ()))
        m2 = tuple(e for e in b.members_e2 if pos not in removals.get(e, ()))
        if bc.dirty:
            if len(m1) >= 2:
                new_blocks.append(Block(b.signature, m1))
        else:
            if m1 and m2:
                new_blocks.append(Block(b.signature, m1, m2))
    return BlockCollection.build(tuple(new_blocks), bc.dirty)


def extract_candidates(bc: BlockCollection) -> set[CandidatePair]:
    """The distinct union of all within-block cross pairs."""
    seen: set[tuple[int, int]] = set()
    for b in bc.blocks:
        if bc.dirty:
            members = b.members_e1
            for a in range(len(members)):
                for c in range(a + 1, len(members)):
                    seen.add((members[a], members[c]))
        else:
            for i in b.members_e1:
                for j in b.members_e2:
                    seen.add((i, j) if i < j else (j, i))
    return {CandidatePair(i, j) for i, j in seen}


def pipeline_blocks(
    profiles_e1: list[EntityProfile],
    profiles_e2: Optional[list[EntityProfile]] = None,
    filter_ratio: float = 0.20,
) -> BlockCollection:
    """Token blocking, then purging, then filtering, in the standard order."""
    total = len(profiles_e1) + len(profiles_e2 or ())
    bc = token_blocking(profiles_e1, profiles_e2)
    bc = block_purging(bc, total)
    bc = block_filtering(bc, filter_ratio)
    return bc
