"""Quick oracle and invariant battery run by ``sparse-community verify``."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analytic, combinatorics
from .graphs import Graph, derive_seed, gen_er, gen_planted, induced, is_forest
from .likelihood import TruncationEvent, exhaustive_moments, hypergeometric_second_moment, risk_lower_bound
from .statistics import broad_scan, broad_scan_range, edges_within, ktree_count, scan, triangles


def _brute_scan(g: Graph, k: int) -> int:
    return max(edges_within(g, list(S)) for S in itertools.combinations(range(g.num_vertices), k))


def _check_cayley(seed: int) -> None:
    for l in range(1, 8):
        assert sum(1 for _ in combinatorics.enumerate_trees(l)) == combinatorics.labelled_tree_count(l)


def _check_containing(seed: int) -> None:
    for l in range(2, 7):
        for k in range(2, l + 1):
            path = [(i, i + 1) for i in range(k - 1)]
            assert combinatorics.count_trees_containing(path, l) == \
                combinatorics.trees_containing_tree(k, l)


def _check_forests(seed: int) -> None:
    for k in range(2, 8):
        c = combinatorics.forest_counts(k).counts
        assert c[0] == k ** (k - 2) and c[-1] == 1
        assert all(a >= b for a, b in zip(c, c[1:]))


def _check_analytic(seed: int) -> None:
    assert abs(analytic.kl_bernoulli(0.9, 0.5) - 0.3680642071684971) < 1e-12
    for lam in (1.01, 2.0, 4.0, 20.0):
        e = analytic.eta(lam)
        assert abs(e - math.exp(lam * (e - 1))) < 1e-12 and e < 1 / lam
    _, _, d = analytic.tilt(0.1, 0.2)
    assert abs(d - math.log(1 + 0.01 / 0.09)) < 1e-14


def _check_scan(seed: int) -> None:
    for r in range(5):
        g = gen_er(14, 0.3, derive_seed(seed, r, 7))
        for k in (3, 4, 5):
            ex = scan(g, k, "exact")
            assert ex.value == _brute_scan(g, k) == edges_within(g, ex.witness)
            assert scan(g, k, "greedy").value <= ex.value


def _check_broad_scan(seed: int) -> None:
    g = gen_er(16, 0.3, derive_seed(seed, 0, 8))
    ks = broad_scan_range(16, 8)
    best = max(_brute_scan(g, k) / k for k in ks)
    assert broad_scan(g, 8, "exact").value == best


def _check_ktree(seed: int) -> None:
    for r in range(3):
        g = gen_er(10, 0.3, derive_seed(seed, r, 9))
        for k in (3, 4):
            brute = sum(1 for S in itertools.combinations(range(10), k)
                        if induced(g, S).num_edges == k - 1 and is_forest(induced(g, S)))
            assert ktree_count(g, k) == brute


def _check_triangles(seed: int) -> None:
    g = gen_er(30, 0.3, derive_seed(seed, 0, 10))
    A = g.to_dense().astype(np.int64)
    assert triangles(g) == int(np.trace(A @ A @ A)) // 6


def _check_likelihood(seed: int) -> None:
    m = exhaustive_moments(4, 2, Fraction(1, 4), Fraction(1, 2), exact=True)
    assert m.E0_L == 1 and m.E0_Lt == 1
    f = exhaustive_moments(4, 3, Fraction(1, 4), Fraction(1, 2), TruncationEvent.forest(), exact=True)
    assert f.E0_Lt == 1 - Fraction(1, 8)
    h = hypergeometric_second_moment(5, 3, 0.1, 0.4)
    assert abs(exhaustive_moments(5, 3, 0.1, 0.4).E0_L2 - h) < 1e-12
    assert risk_lower_bound(1, 1) == 4 / 27


def _check_planted(seed: int) -> None:
    inst = gen_planted(100, 0.0, 10, 1.0, seed)
    assert inst.graph.num_edges == 45 and edges_within(inst.graph, inst.community) == 45


CHECKS: list[tuple[str, Callable[[int], None]]] = [
    ("cayley_enumeration", _check_cayley),
    ("trees_containing_tree", _check_containing),
    ("forest_counts", _check_forests),
    ("analytic_values", _check_analytic),
    ("scan_exact_vs_brute_force", _check_scan),
    ("broad_scan_vs_brute_force", _check_broad_scan),
    ("ktree_vs_brute_force", _check_ktree),
    ("triangles_vs_trace", _check_triangles),
    ("likelihood_identities", _check_likelihood),
    ("planted_clique", _check_planted),
]


def run_battery(seed: int = 0) -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in CHECKS:
        try:
            fn(seed)
            results.append((name, True, ""))
        except AssertionError as exc:
            results.append((name, False, str(exc)))
    return results
