"""Shared fixtures: a small deduplication toy set and randomized generators."""

from __future__ import annotations

import random

import pytest

from metablocking.model import (
    Block,
    BlockCollection,
    CandidatePair,
    EntityProfile,
    GroundTruth,
    Source,
)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)


def _profile(idx: int, text: str) -> EntityProfile:
    return EntityProfile(idx, Source.DIRTY, (("name", text),))


@pytest.fixture
def smartphone_profiles() -> list[EntityProfile]:
    """Seven product records with three duplicate pairs.

    (0, 2) share several tokens, (1, 3) and (5, 6) share at least one, and
    the non-matching pair (1, 5) also co-occurs through the 'phone' token.
    """
    return [
        _profile(0, "samsung galaxy s4"),
        _profile(1, "apple iphone 5 phone"),
        _profile(2, "galaxy s4 by samsung"),
        _profile(3, "iphone 5 apple"),
        _profile(4, "htc one mini"),
        _profile(5, "nokia lumia 920 phone"),
        _profile(6, "lumia 920 nokia"),
    ]


@pytest.fixture
def smartphone_gt() -> GroundTruth:
    return GroundTruth.from_pairs([(0, 2), (1, 3), (5, 6)])


def random_block_collection(
    rng: random.Random,
    max_entities: int = 50,
    max_blocks: int = 40,
    dirty: bool | None = None,
) -> BlockCollection:
    if dirty is None:
        dirty = rng.random() < 0.5
    n_entities = rng.randint(4, max_entities)
    n_blocks = rng.randint(1, max_blocks)
    blocks = []
    if dirty:
        entities = list(range(n_entities))
        for b in range(n_blocks):
            size = rng.randint(2, min(6, n_entities))
            members = tuple(sorted(rng.sample(entities, size)))
            blocks.append(Block(f"b{b}", members))
    else:
        split = rng.randint(1, n_entities - 1)
        e1 = list(range(split))
        e2 = list(range(split, n_entities))
        for b in range(n_blocks):
            m1 = tuple(sorted(rng.sample(e1, rng.randint(1, min(3, len(e1))))))
            m2 = tuple(sorted(rng.sample(e2, rng.randint(1, min(3, len(e2))))))
            blocks.append(Block(f"b{b}", m1, m2))
    return BlockCollection.build(tuple(blocks), dirty)


def random_scored_pairs(
    rng: random.Random, max_pairs: int = 100, n_entities: int = 20
) -> list[CandidatePair]:
    """Random scored candidates; probabilities are coarsened so ties occur."""
    n_pairs = rng.randint(1, max_pairs)
    keys = set()
    while len(keys) < min(n_pairs, n_entities * (n_entities - 1) // 2):
        i, j = rng.sample(range(n_entities), 2)
        keys.add((min(i, j), max(i, j)))
    return [
        CandidatePair(i, j, probability=round(rng.random(), 1))
        for i, j in sorted(keys)
    ]


def random_dirty_profiles(
    rng: random.Random, n_clusters: int = 60, noise_tokens: int = 30
) -> tuple[list[EntityProfile], GroundTruth]:
    """Synthetic dirty collection: duplicate pairs share most of their tokens,
    every record also carries shared noise tokens."""
    vocabulary = [f"tok{v}" for v in range(200)]
    noise = [f"common{v}" for v in range(noise_tokens)]
    profiles = []
    matches = []
    idx = 0
    for _ in range(n_clusters):
        base = rng.sample(vocabulary, rng.randint(3, 5))
        dup_count = 2 if rng.random() < 0.6 else 1
        members = []
        for _ in range(dup_count):
            tokens = [t for t in base if rng.random() > 0.2]
            tokens += rng.sample(noise, rng.randint(1, 3))
            if rng.random() < 0.3:
                tokens += rng.sample(vocabulary, 1)
            profiles.append(_profile(idx, " ".join(tokens)))
            members.append(idx)
            idx += 1
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                matches.append((members[a], members[b]))
    return profiles, GroundTruth.from_pairs(matches)
