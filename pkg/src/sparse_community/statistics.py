"""Test statistics: total degree, subset edge counts, scan and broad scan,
largest component, triangles and induced k-trees.

Every statistic is reachable through :data:`STATISTICS` by a stable name.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse import csr_matrix

from .graphs import Graph, components, edge_mask_within, make_rng

SCAN_MODES = ("exact", "greedy", "component")
EXACT_CAP = 40
GREEDY_RESTARTS = 8
KTREE_NODE_BUDGET = 5_000_000


class FeasibilityError(RuntimeError):
    """An exact computation was refused because it exceeds its size cap."""


@dataclass(frozen=True)
class ScanResult:
    value: int
    witness: tuple[int, ...]
    exact: bool


@dataclass(frozen=True)
class BroadScanResult:
    value: float
    k: int
    scan: ScanResult


@dataclass(frozen=True)
class LargestComponent:
    size: int
    edges: int
    min_vertex: int


def total_degree(g: Graph) -> int:
    return g.num_edges


def edges_within(g: Graph, S) -> int:
    return int(np.count_nonzero(edge_mask_within(g, S)))


# --- scan ---------------------------------------------------------------

def _bitmasks(g: Graph) -> list[int]:
    masks = [0] * g.num_vertices
    for u, v in g.edges.tolist():
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _scan_small_k(g: Graph, k: int) -> ScanResult:
    # k <= 3 is solvable by inspection on any graph size
    N = g.num_vertices
    if k == 1:
        return ScanResult(0, (0,), True)
    if k == 2:
        if g.num_edges:
            u, v = g.edges[0].tolist()
            return ScanResult(1, (u, v), True)
        return ScanResult(0, (0, 1), True)
    tri = _first_triangle(g)
    if tri is not None:
        return ScanResult(3, tri, True)
    deg = g.degrees
    hub = int(np.argmax(deg)) if N else 0
    if N and deg[hub] >= 2:
        a, b = g.neighbors(hub)[:2].tolist()
        return ScanResult(2, tuple(sorted((hub, a, b))), True)
    if g.num_edges:
        u, v = g.edges[0].tolist()
        w = next(x for x in range(N) if x not in (u, v))
        return ScanResult(1, tuple(sorted((u, v, w))), True)
    return ScanResult(0, (0, 1, 2), True)


def _first_triangle(g: Graph):
    adj = g.adjacency_sets()
    for u, v in g.edges.tolist():
        common = adj[u] & adj[v]
        if common:
            return tuple(sorted((u, v, min(common))))
    return None


def _scan_exact(g: Graph, k: int, cap: int) -> ScanResult:
    N = g.num_vertices
    if k <= 3:
        return _scan_small_k(g, k)
    if N > cap:
        raise FeasibilityError(f"exact scan refused: N={N} exceeds cap {cap} (k={k})")
    if k == N:
        return ScanResult(g.num_edges, tuple(range(N)), True)
    adj = _bitmasks(g)
    seed = _scan_greedy(g, k, restarts=2, seed=0)
    best_val = seed.value
    best_set = 0
    for v in seed.witness:
        best_set |= 1 << v
    max_edges = k * (k - 1) // 2

    # search state: chosen mask, candidate mask, chosen count, edges so far
    def search(chosen: int, cand: int, t: int, edges: int) -> None:
        nonlocal best_val, best_set
        if t == k:
            if edges > best_val:
                best_val, best_set = edges, chosen
            return
        r = k - t
        if cand.bit_count() < r or best_val >= max_edges:
            return
        scores = []
        pick, pick_key = -1, -1
        for v in _bits(cand):
            a = (adj[v] & chosen).bit_count()
            b = (adj[v] & cand).bit_count()
            scores.append(2 * a + min(r - 1, b))
            key = 2 * a + b
            if key > pick_key:
                pick, pick_key = v, key
        scores.sort(reverse=True)
        # each new-new edge is counted from both ends, hence the factor 2
        bound = edges + sum(scores[:r]) // 2
        if bound <= best_val:
            return
        bit = 1 << pick
        rest = cand & ~bit
        search(chosen | bit, rest, t + 1, edges + (adj[pick] & chosen).bit_count())
        search(chosen, rest, t, edges)

    search(0, (1 << N) - 1, 0, 0)
    witness = tuple(_bits(best_set))
    return ScanResult(best_val, witness, True)


def _hill_climb(g: Graph, start: np.ndarray, adj: list[set[int]]) -> tuple[int, np.ndarray]:
    """Best single-swap local search from the vertex set ``start``."""
    N = g.num_vertices
    inside = np.zeros(N, dtype=bool)
    inside[start] = True
    ptr, idx = g.indptr, g.indices
    d_in = np.zeros(N, dtype=np.int64)
    for v in start.tolist():
        d_in[idx[ptr[v]:ptr[v + 1]]] += 1
    value = int(d_in[inside].sum()) // 2
    if inside.all():
        return value, np.flatnonzero(inside)
    while True:
        ins = np.flatnonzero(inside)
        outs = np.flatnonzero(~inside)
        ins = ins[np.argsort(d_in[ins], kind="stable")]
        outs = outs[np.argsort(-d_in[outs], kind="stable")]
        d_min = d_in[ins[0]]
        best, pair = 0, None
        for v in outs.tolist():
            dv = d_in[v]
            if dv - d_min <= best:
                break
            nb = adj[v]
            for u in ins.tolist():
                g0 = dv - d_in[u]
                if g0 <= best:
                    break
                gain = g0 - (1 if u in nb else 0)
                if gain > best:
                    best, pair = gain, (u, v)
                    break
        if pair is None:
            return value, np.flatnonzero(inside)
        u, v = pair
        inside[u], inside[v] = False, True
        d_in[idx[ptr[u]:ptr[u + 1]]] -= 1
        d_in[idx[ptr[v]:ptr[v + 1]]] += 1
        value += int(best)


def _densest_component_start(g: Graph, k: int) -> np.ndarray:
    comps = components(g)
    labels = comps.labels
    e_count = np.bincount(labels[g.edges[:, 0]], minlength=comps.num_components)
    density = e_count / comps.counts
    best = int(np.argmax(density))
    deg = g.degrees
    order = np.lexsort((np.arange(g.num_vertices), -deg, labels != best))
    return np.sort(order[:k])


def _scan_greedy(g: Graph, k: int, restarts: int = GREEDY_RESTARTS, seed: int = 0) -> ScanResult:
    N = g.num_vertices
    adj = g.adjacency_sets()
    starts = [
        np.asarray(_component_profile(g, k).witness(k), dtype=np.int64),
        _densest_component_start(g, k),
    ]
    rng = make_rng(seed)
    for _ in range(restarts):
        starts.append(np.sort(rng.choice(N, size=k, replace=False)))
    best_val, best_set = -1, None
    for s in starts:
        val, members = _hill_climb(g, s, adj)
        if val > best_val:
            best_val, best_set = val, members
    return ScanResult(best_val, tuple(best_set.tolist()), False)


class _ComponentProfile:
    """Best edge counts for every subset size built from whole components.

    Cyclic components contribute their min-degree peeling sequence; tree
    components are pooled, since ``t`` vertices drawn from the largest trees
    carry ``t - (number of trees touched)`` edges. A max-plus knapsack
    combines the parts.
    """

    def __init__(self, g: Graph, kmax: int):
        self.g = g
        self.kmax = kmax
        comps = components(g)
        labels = comps.labels
        e_count = np.bincount(labels[g.edges[:, 0]], minlength=comps.num_components)
        members = comps.members()
        excess = e_count - comps.counts + 1
        cyclic = np.flatnonzero(excess > 0)
        trees = np.flatnonzero(excess == 0)

        neg = np.iinfo(np.int64).min // 4
        dp = np.full(kmax + 1, neg, dtype=np.int64)
        dp[0] = 0
        self._parts = []  # (peel order, choice array) per cyclic component
        for c in cyclic.tolist():
            order, prof = _peel(g, members[c], kmax)
            new = dp.copy()
            choice = np.zeros(kmax + 1, dtype=np.int64)
            for s in range(1, len(prof)):
                cand = np.full(kmax + 1, neg, dtype=np.int64)
                cand[s:] = dp[:kmax + 1 - s] + prof[s]
                better = cand > new
                new[better] = cand[better]
                choice[better] = s
            dp = new
            self._parts.append((order, choice))

        # tree pool: sizes largest first, ties by component id
        t_sizes = comps.counts[trees]
        t_order = np.lexsort((trees, -t_sizes))
        self._trees = [members[c] for c in trees[t_order].tolist()]
        cum = np.cumsum(t_sizes[t_order])
        tree_val = np.full(kmax + 1, neg, dtype=np.int64)
        tree_val[0] = 0
        t = np.arange(1, kmax + 1)
        used = np.searchsorted(cum, t, side="left") + 1
        ok = t <= (cum[-1] if len(cum) else 0)
        tree_val[1:][ok] = t[ok] - used[ok]
        self._dp_cyclic = dp

        total = np.full(kmax + 1, neg, dtype=np.int64)
        split = np.zeros(kmax + 1, dtype=np.int64)
        for tt in range(kmax + 1):
            if tree_val[tt] == neg:
                continue
            cand = np.full(kmax + 1, neg, dtype=np.int64)
            cand[tt:] = dp[:kmax + 1 - tt] + tree_val[tt]
            better = cand > total
            total[better] = cand[better]
            split[better] = tt
        self.values = total
        self._split = split

    def value(self, k: int) -> int:
        return int(self.values[k])

    def witness(self, k: int) -> list[int]:
        t_tree = int(self._split[k])
        rest = k - t_tree
        out: list[int] = []
        for order, choice in reversed(self._parts):
            s = int(choice[rest])
            if s:
                out.extend(order[:s])
                rest -= s
        assert rest == 0
        need = t_tree
        for tree in self._trees:
            if need == 0:
                break
            if len(tree) <= need:
                out.extend(tree.tolist())
                need -= len(tree)
            else:
                out.extend(_bfs_prefix(self.g, int(tree[0]), need))
                need = 0
        return sorted(out)


def _peel(g: Graph, verts: np.ndarray, kmax: int) -> tuple[list[int], np.ndarray]:
    """Min-degree peeling of a component.

    Returns the vertices in reverse removal order (so every prefix is the
    peeled subset of that size) and the edge count of each prefix size up to
    ``min(len(verts), kmax)``.
    """
    vs = verts.tolist()
    alive = set(vs)
    ptr, idx = g.indptr, g.indices
    nbrs = {v: idx[ptr[v]:ptr[v + 1]].tolist() for v in vs}
    deg = {v: len(nbrs[v]) for v in vs}
    edges = sum(deg.values()) // 2
    heap = [(deg[v], v) for v in vs]
    heapq.heapify(heap)
    removed: list[int] = []
    edge_at = {len(vs): edges}
    while len(alive) > 1:
        d, v = heapq.heappop(heap)
        if v not in alive or d != deg[v]:
            continue
        alive.discard(v)
        removed.append(v)
        edges -= d
        for w in nbrs[v]:
            if w in alive:
                deg[w] -= 1
                heapq.heappush(heap, (deg[w], w))
        edge_at[len(alive)] = edges
    removed.extend(alive)
    order = removed[::-1]
    top = min(len(vs), kmax)
    prof = np.zeros(top + 1, dtype=np.int64)
    for s in range(2, top + 1):
        prof[s] = edge_at[s]
    return order, prof


def _bfs_prefix(g: Graph, root: int, count: int) -> list[int]:
    seen = {root}
    queue = [root]
    head = 0
    while head < len(queue) and len(queue) < count:
        v = queue[head]
        head += 1
        for w in g.neighbors(v).tolist():
            if w not in seen:
                seen.add(w)
                queue.append(w)
                if len(queue) == count:
                    break
    return queue[:count]


def _component_profile(g: Graph, kmax: int) -> _ComponentProfile:
    return _ComponentProfile(g, kmax)


def scan(g: Graph, k: int, mode: str = "exact", *, exact_cap: int = EXACT_CAP,
         restarts: int = GREEDY_RESTARTS, seed: int = 0) -> ScanResult:
    """Maximum edge count over size-``k`` vertex subsets.

    ``exact`` runs branch-and-bound and refuses graphs with more than
    ``exact_cap`` vertices unless ``k <= 3``. ``greedy`` hill-climbs with best
    single swaps from the component seed, the top-degree vertices of the
    densest component, and ``restarts`` random subsets. ``component`` builds
    the subset from peeled connected components without local search.
    """
    N = g.num_vertices
    if not (1 <= k <= N):
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={N}")
    if mode == "exact":
        return _scan_exact(g, k, exact_cap)
    if mode == "greedy":
        return _scan_greedy(g, k, restarts, seed)
    if mode == "component":
        prof = _component_profile(g, k)
        return ScanResult(prof.value(k), tuple(prof.witness(k)), False)
    raise ValueError(f"unknown scan mode {mode!r}; expected one of {SCAN_MODES}")


def broad_scan_range(N: int, n: int) -> range:
    """Sizes ``k`` scanned for community size ``n``: ``[max(2, ceil(n/u)), n]``."""
    if not (2 <= n <= N):
        raise ValueError("need 2 <= n <= N")
    ratio = N / n
    u = 2.0
    if ratio > math.e:
        u = max(math.log(math.log(ratio)), 2.0)
    k_lo = max(2, math.ceil(n / u - 1e-12))
    return range(k_lo, n + 1)


def broad_scan(g: Graph, n: int, mode: str = "component", *, exact_cap: int = EXACT_CAP,
               restarts: int = GREEDY_RESTARTS, seed: int = 0) -> BroadScanResult:
    """``max_k W_k* / k`` over :func:`broad_scan_range`; smallest maximizing k wins ties."""
    ks = broad_scan_range(g.num_vertices, n)
    if mode == "component":
        prof = _component_profile(g, ks[-1])
        results = {k: None for k in ks}
        values = {k: prof.value(k) for k in ks}
    else:
        results = {k: scan(g, k, mode, exact_cap=exact_cap, restarts=restarts, seed=seed)
                   for k in ks}
        values = {k: r.value for k, r in results.items()}
    best_k = ks[0]
    for k in ks[1:]:
        if values[k] * best_k > values[best_k] * k:
            best_k = k
    res = results[best_k]
    if res is None:
        res = ScanResult(values[best_k], tuple(prof.witness(best_k)), False)
    return BroadScanResult(values[best_k] / best_k, best_k, res)


# --- other statistics -----------------------------------------------------

def largest_cc(g: Graph) -> LargestComponent:
    """Largest component; ties go to the one holding the smallest vertex."""
    if g.num_vertices == 0:
        return LargestComponent(0, 0, -1)
    comps = components(g)
    c = int(np.argmax(comps.counts))
    edges = int(np.count_nonzero(comps.labels[g.edges[:, 0]] == c))
    return LargestComponent(int(comps.counts[c]), edges,
                            int(np.flatnonzero(comps.labels == c)[0]))


def triangles(g: Graph) -> int:
    """Triangle count by forward neighbor intersection.

    Edges are oriented from lower to higher (degree, label) rank, so each
    out-list has O(sqrt(m)) entries. ``(D D^T)[u, v]`` is the size of the
    intersection of the out-lists of ``u`` and ``v``; summing it over oriented
    edges counts every triangle once.
    """
    N, m = g.num_vertices, g.num_edges
    if m < 3:
        return 0
    deg = g.degrees
    rank = np.empty(N, dtype=np.int64)
    rank[np.lexsort((np.arange(N), deg))] = np.arange(N)
    u, v = g.edges[:, 0], g.edges[:, 1]
    flip = rank[u] > rank[v]
    src = np.where(flip, v, u)
    dst = np.where(flip, u, v)
    D = csr_matrix((np.ones(m, dtype=np.int64), (src, dst)), shape=(N, N))
    common = D @ D.T
    return int(common.multiply(D).sum())


def ktree_count(g: Graph, k: int, node_budget: int = KTREE_NODE_BUDGET) -> int:
    """Number of size-``k`` vertex sets whose induced subgraph is a tree.

    Enumerates connected induced subgraphs by vertex extension with exclusive
    neighborhoods (each connected set is produced once, from its smallest
    vertex). A branch is cut as soon as its induced subgraph holds a cycle,
    because every superset then does too.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    N = g.num_vertices
    if k == 1:
        return N
    adj = g.adjacency_sets()
    count = 0
    nodes = 0

    def extend(sub: set, closed: set, ext: list, root: int) -> None:
        nonlocal count, nodes
        nodes += 1
        if nodes > node_budget:
            raise FeasibilityError(f"k-tree enumeration exceeded {node_budget} nodes")
        ext = list(ext)
        while ext:
            w = ext.pop()
            if len(adj[w] & sub) != 1:
                continue  # adding w would close a cycle
            if len(sub) + 1 == k:
                count += 1
                continue
            new_ext = ext + [x for x in adj[w] if x > root and x not in closed]
            extend(sub | {w}, closed | adj[w], new_ext, root)

    for v in range(N):
        ext = [x for x in adj[v] if x > v]
        extend({v}, adj[v] | {v}, ext, v)
    return count


# --- registry -------------------------------------------------------------

def _stat_scan(g: Graph, k: int, mode: str = "greedy", **kw) -> float:
    return float(scan(g, int(k), mode, **kw).value)


def _stat_broad_scan(g: Graph, n: int, mode: str = "component", **kw) -> float:
    return broad_scan(g, int(n), mode, **kw).value


STATISTICS: dict[str, Callable[..., float]] = {
    "total_degree": lambda g: float(total_degree(g)),
    "scan": _stat_scan,
    "broad_scan": _stat_broad_scan,
    "largest_cc": lambda g: float(largest_cc(g).size),
    "triangles": lambda g: float(triangles(g)),
    "ktree": lambda g, k, node_budget=KTREE_NODE_BUDGET: float(
        ktree_count(g, int(k), int(node_budget))),
}


def evaluate(name: str, g: Graph, **params) -> float:
    """Evaluate the registered statistic ``name`` on ``g``."""
    try:
        fn = STATISTICS[name]
    except KeyError:
        raise ValueError(f"unknown statistic {name!r}; known: {sorted(STATISTICS)}") from None
    return fn(g, **params)
