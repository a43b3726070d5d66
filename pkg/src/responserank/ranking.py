"""Turning strength-annotated comparisons into anchored target rankings.

Pipeline: stratify by metadata, normalise each comparison to (winner, loser),
split strata into tie-free partitions, sort each partition by strength
(fastest response first). The anchor with score 0 is implicit: it always sits
below the last element of every :class:`RankingTarget`.
"""
from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np


class TieError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizedComparison:
    winner: np.ndarray
    loser: np.ndarray
    strength: float
    index: int = -1  # position in the source dataset, for bookkeeping


@dataclass(frozen=True)
class RankingTarget:
    """Comparisons strongest first (ascending response time), anchor implied last."""

    ordered: tuple[NormalizedComparison, ...]

    def __post_init__(self):
        if not self.ordered:
            raise ValueError("a ranking needs at least one comparison")

    def __len__(self) -> int:
        return len(self.ordered)

    @property
    def strengths(self) -> list[float]:
        return [c.strength for c in self.ordered]

    @property
    def indices(self) -> list[int]:
        return [c.index for c in self.ordered]


@dataclass
class PackedBatch:
    rankings: list[RankingTarget]
    capacity: int

    @property
    def size(self) -> int:
        return sum(len(r) for r in self.rankings)


def normalize(a, b, pref_a: bool, strength: float, index: int = -1) -> NormalizedComparison:
    if pref_a:
        return NormalizedComparison(a, b, strength, index)
    return NormalizedComparison(b, a, strength, index)


def normalize_all(comps) -> list[NormalizedComparison]:
    """Normalise every row of a :class:`~responserank.synth.Comparisons`."""
    return [normalize(comps.a[i], comps.b[i], bool(comps.pref_a[i]), float(comps.strength[i]), i)
            for i in range(len(comps))]


def stratify(items: Iterable, key: Callable[[object], Hashable]) -> list[list]:
    """Group ``items`` by ``key``; strata come out in sorted key order."""
    groups: dict = defaultdict(list)
    for it in items:
        groups[key(it)].append(it)
    return [groups[k] for k in sorted(groups)]


def tie_groups(members: Sequence[NormalizedComparison]) -> list[list[NormalizedComparison]]:
    groups: dict[float, list] = defaultdict(list)
    for c in members:
        groups[c.strength].append(c)
    return [groups[s] for s in sorted(groups)]


def partition_tie_aware(members: Sequence[NormalizedComparison],
                        max_size: int | None = None) -> list[list[NormalizedComparison]]:
    """Split a stratum into partitions without repeated strength values.

    With ``max_size`` the partition count is ``ceil(n / max_size)``; otherwise it
    is the size of the largest tie group. Tie groups (in ascending strength
    order) are dealt round-robin with one cursor shared across groups, so the
    partition sizes differ by at most one.
    """
    if not members:
        raise ValueError("cannot partition an empty stratum")
    groups = tie_groups(members)
    largest = max(len(g) for g in groups)
    if max_size is None:
        k = largest
    else:
        if max_size < 1:
            raise ValueError("max_size must be >= 1")
        k = math.ceil(len(members) / max_size)
        if k < largest:
            worst = max(groups, key=len)
            raise TieError(f"{k} partitions cannot separate {len(worst)} comparisons tied at "
                           f"strength {worst[0].strength!r}")
    parts: list[list] = [[] for _ in range(k)]
    cursor = 0
    for g in groups:
        for c in g:
            parts[cursor].append(c)
            cursor = (cursor + 1) % k
    return [p for p in parts if p]


def sort_by_strength(partition: Sequence[NormalizedComparison]) -> RankingTarget:
    ordered = sorted(partition, key=lambda c: c.strength)
    for x, y in zip(ordered, ordered[1:]):
        if x.strength == y.strength:
            raise TieError(f"tied strength {x.strength!r} inside a partition")
    return RankingTarget(tuple(ordered))


def build_rankings(members: Sequence[NormalizedComparison], strata_key=None,
                   max_size: int | None = None) -> list[RankingTarget]:
    """Stratify (optional), partition and sort into target rankings."""
    strata = stratify(members, strata_key) if strata_key else [list(members)]
    out = []
    for stratum in strata:
        for part in partition_tie_aware(stratum, max_size):
            out.append(sort_by_strength(part))
    return out


def pack_batches(rankings: Sequence[RankingTarget], capacity: int,
                 rng: np.random.Generator) -> list[PackedBatch]:
    """Largest-first best-fit packing of rankings into fixed-size batches.

    Enough batches are opened to hold every comparison, all of size
    ``capacity`` except the last, which takes the remainder. Fragments are
    taken from a max-heap (ties by insertion order) and shuffled once when
    first seen. A fragment goes into the fullest batch that can hold it;
    if none can, the batch with the most free space receives the largest
    prefix that fits and the suffix returns to the heap. Emitted fragments
    are re-sorted by strength.
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    total = sum(len(r) for r in rankings)
    if total == 0:
        return []
    n_batches = math.ceil(total / capacity)
    caps = [capacity] * n_batches
    caps[-1] = total - capacity * (n_batches - 1)
    free = list(caps)
    contents: list[list[list[NormalizedComparison]]] = [[] for _ in range(n_batches)]

    heap: list = []
    counter = 0
    for r in rankings:
        heapq.heappush(heap, (-len(r), counter, list(r.ordered), True))
        counter += 1

    while heap:
        _, _, frag, fresh = heapq.heappop(heap)
        if fresh:
            frag = [frag[i] for i in rng.permutation(len(frag))]
        size = len(frag)
        fits = [i for i in range(n_batches) if free[i] >= size]
        if fits:
            j = min(fits, key=lambda i: (free[i], i))
            contents[j].append(frag)
            free[j] -= size
            continue
        j = max(range(n_batches), key=lambda i: (free[i], -i))
        take = free[j]
        contents[j].append(frag[:take])
        free[j] = 0
        heapq.heappush(heap, (-(size - take), counter, frag[take:], False))
        counter += 1

    return [PackedBatch([sort_by_strength(f) for f in frags], cap)
            for frags, cap in zip(contents, caps)]


def permute_strengths(comps, rng: np.random.Generator):
    """Shuffle the strength column across comparisons; items and labels stay put."""
    return comps.replace(strength=comps.strength[rng.permutation(len(comps))])


def partition_stats(comps, max_size: int | None = None) -> list[dict]:
    """Per-stratum counts for debugging: size, tie groups, partitions."""
    rows = []
    members = normalize_all(comps)
    for stratum in stratify(members, key=lambda c: int(comps.stratum[c.index])):
        groups = tie_groups(stratum)
        parts = partition_tie_aware(stratum, max_size)
        rows.append({
            "stratum": int(comps.stratum[stratum[0].index]),
            "comparisons": len(stratum),
            "tie_groups": len(groups),
            "largest_tie_group": max(len(g) for g in groups),
            "partitions": len(parts),
            "largest_partition": max(len(p) for p in parts),
        })
    return rows
