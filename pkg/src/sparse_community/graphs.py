"""Graph container, random generation under both hypotheses, and structural
primitives (components, induced subgraphs, forests, cycles).

Seeds
-----
All randomness goes through :func:`make_rng`, a PCG64 generator keyed by a
:class:`numpy.random.SeedSequence`. Replicate ``r`` of a run with master seed
``s`` uses ``derive_seed(s, r)``, which hashes the pair ``(s, r)`` through
``SeedSequence`` into a fresh 64-bit seed. The optional ``stream`` argument
separates independent families of replicates (null draws vs. planted draws)
under one master seed.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

MAX_CYCLE_VERTICES = 16


class GraphFormatError(ValueError):
    """Malformed edge-list input."""


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def derive_seed(master_seed: int, replicate: int, stream: int = 0) -> int:
    """64-bit seed for ``replicate`` of ``stream`` under ``master_seed``."""
    ss = np.random.SeedSequence([int(master_seed), int(stream), int(replicate)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class Graph:
    """Immutable undirected simple graph on vertices ``0..N-1``.

    ``edges`` is an ``(m, 2)`` array with ``i < j`` in each row, sorted
    lexicographically. Neighbor lists are built lazily in CSR form.
    """

    __slots__ = ("_n", "_edges", "_indptr", "_indices")

    def __init__(self, num_vertices: int, edges: Iterable[Sequence[int]] | np.ndarray = ()):
        num_vertices = int(num_vertices)
        if num_vertices < 0:
            raise ValueError("num_vertices must be non-negative")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64)
        if arr.size == 0:
            arr = np.empty((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be a sequence of pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= num_vertices):
            raise ValueError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        arr = np.sort(arr, axis=1)
        key = arr[:, 0] * num_vertices + arr[:, 1]
        order = np.argsort(key, kind="stable")
        key = key[order]
        if key.size > 1 and np.any(key[1:] == key[:-1]):
            raise ValueError("duplicate edge")
        self._init(num_vertices, arr[order])

    @classmethod
    def _trusted(cls, num_vertices: int, edges: np.ndarray) -> "Graph":
        # edges already canonical: i < j, unique, lexicographically sorted
        g = cls.__new__(cls)
        g._init(num_vertices, edges)
        return g

    def _init(self, n: int, edges: np.ndarray) -> None:
        edges = np.ascontiguousarray(edges, dtype=np.int64)
        edges.flags.writeable = False
        self._n = n
        self._edges = edges
        self._indptr = None
        self._indices = None

    @property
    def num_vertices(self) -> int:
        return self._n

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    def _build_csr(self) -> None:
        e = self._edges
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        indices = dst[order]
        indptr = np.zeros(self._n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self._n), out=indptr[1:])
        indices.flags.writeable = False
        indptr.flags.writeable = False
        self._indptr, self._indices = indptr, indices

    @property
    def indptr(self) -> np.ndarray:
        if self._indptr is None:
            self._build_csr()
        return self._indptr

    @property
    def indices(self) -> np.ndarray:
        if self._indices is None:
            self._build_csr()
        return self._indices

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbors of ``v``."""
        ptr = self.indptr
        return self.indices[ptr[v]:ptr[v + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency_sets(self) -> list[set[int]]:
        ptr, idx = self.indptr, self.indices
        return [set(idx[ptr[v]:ptr[v + 1]].tolist()) for v in range(self._n)]

    def to_sparse(self) -> csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int64)
        return csr_matrix((data, self.indices, self.indptr), shape=(self._n, self._n))

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self._n, self._n), dtype=np.int64)
        a[self._edges[:, 0], self._edges[:, 1]] = 1
        a[self._edges[:, 1], self._edges[:, 0]] = 1
        return a

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(N={self._n}, m={self.num_edges})"


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    graph: Graph
    community: np.ndarray  # sorted vertex labels of S
    N: int
    n: int
    p0: float
    p1: float


# --- generation ---------------------------------------------------------

def _row_offsets(N: int) -> np.ndarray:
    # offset of row i in the lexicographic list of pairs (i, j), i < j
    i = np.arange(N, dtype=np.int64)
    return i * (2 * N - i - 1) // 2


def pairs_from_index(idx: np.ndarray, N: int) -> np.ndarray:
    """Map linear indices over the ``C(N, 2)`` lexicographic pairs to (i, j)."""
    idx = np.asarray(idx, dtype=np.int64)
    offsets = _row_offsets(N)
    rows = np.searchsorted(offsets, idx, side="right") - 1
    cols = idx - offsets[rows] + rows + 1
    return np.stack([rows, cols], axis=1)


def _sample_pair_indices(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted indices of successes in ``total`` Bernoulli(p) trials."""
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    if p >= 0.25:
        return np.flatnonzero(rng.random(total) < p).astype(np.int64)
    # geometric skipping: gaps between successes are Geometric(p)
    mean = total * p
    chunk = int(mean + 6.0 * np.sqrt(mean) + 16)
    out = []
    last = -1
    while True:
        gaps = rng.geometric(p, size=chunk)
        pos = last + np.cumsum(gaps, dtype=np.int64)
        if pos[-1] >= total:
            out.append(pos[pos < total])
            break
        out.append(pos)
        last = int(pos[-1])
    return np.concatenate(out)


def _check_prob(name: str, p: float) -> None:
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")


def gen_er(N: int, p: float, seed) -> Graph:
    """Erdos-Renyi graph G(N, p), deterministic given ``seed``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    _check_prob("p", p)
    rng = make_rng(seed)
    idx = _sample_pair_indices(N * (N - 1) // 2, p, rng)
    return Graph._trusted(N, pairs_from_index(idx, N))


def gen_planted(N: int, p0: float, n: int, p1: float, seed) -> PlantedInstance:
    """G(N, p0; n, p1) with the community drawn uniformly among size-n sets."""
    if not (2 <= n <= N):
        raise ValueError("need 2 <= n <= N")
    _check_prob("p0", p0)
    _check_prob("p1", p1)
    if p1 < p0:
        raise ValueError("need p0 <= p1")
    rng = make_rng(seed)
    S = np.sort(rng.choice(N, size=n, replace=False)).astype(np.int64)
    outer = pairs_from_index(_sample_pair_indices(N * (N - 1) // 2, p0, rng), N)
    in_s = np.zeros(N, dtype=bool)
    in_s[S] = True
    outer = outer[~(in_s[outer[:, 0]] & in_s[outer[:, 1]])]
    inner = S[pairs_from_index(_sample_pair_indices(n * (n - 1) // 2, p1, rng), n)]
    edges = np.concatenate([outer, inner])
    key = edges[:, 0] * N + edges[:, 1]
    edges = edges[np.argsort(key, kind="stable")]
    S.flags.writeable = False
    return PlantedInstance(Graph._trusted(N, edges), S, N, n, p0, p1)


# --- structure ----------------------------------------------------------

class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.num_components = size

    def copy(self) -> "UnionFind":
        other = UnionFind(0)
        other.parent = self.parent.copy()
        other.size = self.size.copy()
        other.num_components = self.num_components
        return other

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if they were already one."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.num_components -= 1
        return True


@dataclass(frozen=True, eq=False)
class Components:
    labels: np.ndarray   # component id per vertex, ids ordered by min vertex
    counts: np.ndarray   # size of each component id

    @property
    def num_components(self) -> int:
        return len(self.counts)

    @property
    def sizes(self) -> list[int]:
        """Component sizes, largest first."""
        return sorted(self.counts.tolist(), reverse=True)

    def members(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        return np.split(order, np.cumsum(self.counts)[:-1])


def components(g: Graph) -> Components:
    """Connected components; component ids are ordered by smallest vertex."""
    if g.num_vertices == 0:
        return Components(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    k, labels = connected_components(g.to_sparse(), directed=False)
    first = np.full(k, g.num_vertices, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(g.num_vertices))
    remap = np.empty(k, dtype=np.int64)
    remap[np.argsort(first)] = np.arange(k)
    labels = remap[labels]
    return Components(labels, np.bincount(labels, minlength=k))


def cyclomatic_number(g: Graph) -> int:
    """``m - N + c``; zero iff the graph is a forest."""
    return g.num_edges - g.num_vertices + components(g).num_components


def is_forest(g: Graph) -> bool:
    uf = UnionFind(g.num_vertices)
    for u, v in g.edges.tolist():
        if not uf.union(u, v):
            return False
    return True


def _as_vertex_array(g: Graph, S) -> np.ndarray:
    S = np.unique(np.asarray(list(S) if not isinstance(S, np.ndarray) else S,
                             dtype=np.int64))
    if S.size and (S[0] < 0 or S[-1] >= g.num_vertices):
        raise ValueError("vertex out of range")
    return S


def edge_mask_within(g: Graph, S) -> np.ndarray:
    S = _as_vertex_array(g, S)
    inside = np.zeros(g.num_vertices, dtype=bool)
    inside[S] = True
    e = g.edges
    return inside[e[:, 0]] & inside[e[:, 1]]


def induced(g: Graph, S) -> Graph:
    """Subgraph induced by ``S``, relabeled ``0..|S|-1`` in sorted order of S."""
    S = _as_vertex_array(g, S)
    mask = edge_mask_within(g, S)
    relabel = np.full(g.num_vertices, -1, dtype=np.int64)
    relabel[S] = np.arange(len(S))
    # relabeling is monotone, so lexicographic order survives
    return Graph._trusted(len(S), relabel[g.edges[mask]])


def count_simple_cycles(g: Graph) -> int:
    """Number of simple cycles (length >= 3) by exhaustive search."""
    N = g.num_vertices
    if N > MAX_CYCLE_VERTICES:
        raise ValueError(f"cycle enumeration capped at {MAX_CYCLE_VERTICES} vertices")
    adj = [[int(w) for w in g.neighbors(v)] for v in range(N)]
    total = 0
    for s in range(N):
        # cycles whose smallest vertex is s; each found once per direction
        stack = [(s, iter(adj[s]))]
        on_path = {s}
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if w == s and len(on_path) >= 3:
                    total += 1
                elif w > s and w not in on_path:
                    on_path.add(w)
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                on_path.discard(v)
    return total // 2


# --- edge-list I/O ------------------------------------------------------

def write_edgelist(g: Graph, dest) -> None:
    """Write ``"N m"`` then one ``"i j"`` line per edge."""
    lines = [f"{g.num_vertices} {g.num_edges}"]
    lines.extend(f"{u} {v}" for u, v in g.edges.tolist())
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


def parse_edgelist(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise GraphFormatError("missing header line")
    try:
        header = [int(x) for x in rows[0]]
        body = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise GraphFormatError(f"bad edge-list line: {exc}") from None
    if len(header) != 2:
        raise GraphFormatError("header must be 'N m'")
    N, m = header
    if len(body) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(body)}")
    try:
        return Graph(N, body)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def read_edgelist(src) -> Graph:
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            return parse_edgelist(fh.read())
    if isinstance(src, io.TextIOBase) or hasattr(src, "read"):
        return parse_edgelist(src.read())
    raise TypeError("expected a path or a text stream")
