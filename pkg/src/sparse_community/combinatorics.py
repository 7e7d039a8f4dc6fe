"""Enumeration oracles for labelled trees and forests.

Trees are enumerated through Prüfer sequences, which are in bijection with
labelled trees, so no isomorphism testing is needed. Forests are enumerated
as acyclic edge subsets of the complete graph.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .graphs import UnionFind

FOREST_CAP = 8


def prufer_decode(seq: tuple[int, ...], l: int) -> list[tuple[int, int]]:
    """Edges ``(i, j)`` with ``i < j`` of the tree on ``0..l-1`` coded by ``seq``."""
    degree = [1] * l
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(l) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return sorted(edges)


def enumerate_trees(l: int) -> Iterator[frozenset]:
    """Every labelled tree on ``0..l-1`` as a frozenset of edges."""
    if l < 1:
        raise ValueError("l must be positive")
    if l == 1:
        yield frozenset()
        return
    for seq in itertools.product(range(l), repeat=l - 2):
        yield frozenset(prufer_decode(seq, l))


def labelled_tree_count(l: int) -> int:
    """Cayley's count ``l^(l-2)`` of labelled trees (1 for ``l = 1``)."""
    if l < 1:
        raise ValueError("l must be positive")
    if l == 1:
        return 1
    return l ** (l - 2)


def trees_containing_tree(k: int, l: int) -> int:
    """Labelled trees on ``l`` vertices that contain a fixed tree on ``k`` of them."""
    if not (1 <= k <= l):
        raise ValueError("need 1 <= k <= l")
    if k == l:
        return 1
    return k * l ** (l - k - 1)


def forest_containment_bound(sizes: Iterable[int], l: int) -> float:
    """Upper bound ``(k/r)^r l^(l-k+r-1) (l-k+r-1)^(r-1)`` on the number of
    labelled trees on ``l`` vertices containing a fixed forest whose ``r``
    trees have the given vertex counts (``k`` vertices in total)."""
    sizes = list(sizes)
    r, k = len(sizes), sum(sizes)
    if r < 1 or k > l:
        raise ValueError("need a nonempty forest with at most l vertices")
    m = l - k + r - 1
    return (k / r) ** r * float(l) ** m * float(m) ** (r - 1)


def count_trees_containing(edges: Iterable[tuple[int, int]], l: int) -> int:
    """Count by enumeration the labelled trees on ``l`` vertices containing ``edges``."""
    need = frozenset((min(a, b), max(a, b)) for a, b in edges)
    return sum(1 for t in enumerate_trees(l) if need <= t)


@dataclass(frozen=True)
class ForestCountTable:
    k: int
    counts: tuple[int, ...]  # counts[j - 1] = forests on k labelled vertices with j trees

    def __getitem__(self, j: int) -> int:
        if not (1 <= j <= self.k):
            raise IndexError(j)
        return self.counts[j - 1]


def forest_counts(k: int) -> ForestCountTable:
    """Exact forest counts ``F_{k,j}`` by enumerating acyclic edge subsets of K_k.

    The search adds edges in a fixed order and abandons a branch as soon as an
    edge would close a cycle, so only forests are visited.
    """
    if not (1 <= k <= FOREST_CAP):
        raise ValueError(f"forest enumeration supports 1 <= k <= {FOREST_CAP}")
    pairs = list(itertools.combinations(range(k), 2))
    counts = [0] * (k + 1)

    def grow(start: int, uf: UnionFind) -> None:
        counts[uf.num_components] += 1
        for idx in range(start, len(pairs)):
            a, b = pairs[idx]
            if uf.find(a) != uf.find(b):
                child = uf.copy()
                child.union(a, b)
                grow(idx + 1, child)

    grow(0, UnionFind(k))
    return ForestCountTable(k, tuple(counts[1:]))
