"""Likelihood ratios of the planted model against the null, with truncation.

``L_S`` is the likelihood ratio of "community at S" against the null, ``L``
averages it over all size-n subsets, and the truncated ``L~`` keeps only the
terms whose induced subgraph satisfies a decreasing event. On graphs with at
most five vertices every expectation under the null is an exact finite sum;
for dyadic probabilities the sums can be carried out in rational arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.stats import hypergeom

from .analytic import rate_I, tilt
from .graphs import Graph, components, gen_er, induced, is_forest, make_rng
from .statistics import EXACT_CAP, FeasibilityError, scan

SUBSET_CAP = 10**6
EXHAUSTIVE_CAP = 5
DEFAULT_CAP_CONSTANT = 0.1

Number = float | Fraction


class InvariantError(AssertionError):
    """An identity that must hold exactly was violated."""


@dataclass(frozen=True)
class TruncationEvent:
    """A decreasing event on the subgraph induced by the candidate community.

    ``none`` always holds; ``forest`` requires an acyclic induced subgraph;
    ``forest_with_cap`` additionally bounds every tree by ``cap`` vertices;
    ``edge_cap_profile`` requires ``W_T <= profile[k]`` for every subset T
    of each listed size k.
    """

    kind: str = "none"
    cap: float | None = None
    profile: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("none", "forest", "forest_with_cap", "edge_cap_profile"):
            raise ValueError(f"unknown truncation kind {self.kind!r}")
        if self.kind == "forest_with_cap" and (self.cap is None or self.cap < 1):
            raise ValueError("forest_with_cap needs cap >= 1")
        if self.kind == "edge_cap_profile" and not self.profile:
            raise ValueError("edge_cap_profile needs a nonempty profile")

    @classmethod
    def forest(cls) -> "TruncationEvent":
        return cls("forest")

    @classmethod
    def forest_with_cap(cls, cap: float) -> "TruncationEvent":
        return cls("forest_with_cap", cap=float(cap))

    @classmethod
    def edge_cap_profile(cls, profile: Mapping[int, int]) -> "TruncationEvent":
        return cls("edge_cap_profile", profile=dict(profile))

    def holds(self, h: Graph) -> bool:
        """Evaluate the event on the induced community subgraph ``h``."""
        if self.kind == "none":
            return True
        if self.kind == "forest":
            return is_forest(h)
        if self.kind == "forest_with_cap":
            if not is_forest(h):
                return False
            return h.num_vertices == 0 or max(components(h).counts) <= self.cap
        size = h.num_vertices
        for k, w in self.profile.items():
            if 1 <= k <= size:
                if size > EXACT_CAP and k > 3:
                    raise FeasibilityError(
                        f"edge-cap check needs an exact scan on {size} vertices")
                if scan(h, k, "exact").value > w:
                    return False
        return True


def forest_cap(n: int, lambda1: float, c: float = DEFAULT_CAP_CONSTANT) -> float:
    """Tree-size cap ``(1 + c) log(n) / I_{lambda1}`` for the capped forest event."""
    if c <= 0:
        raise ValueError("c must be positive")
    return (1.0 + c) * math.log(n) / rate_I(lambda1)


# --- single-subset likelihood --------------------------------------------

def _check_pair(p0: Number, p1: Number) -> None:
    if not (0 < p0 <= p1 < 1):
        raise ValueError(f"need 0 < p0 <= p1 < 1, got p0={p0}, p1={p1}")


def log_ls(W: int, size: int, p0: float, p1: float) -> float:
    _check_pair(p0, p1)
    theta, lam, _ = tilt(p0, p1)
    return theta * W - lam * size * (size - 1) / 2


def _ls_exact(W: int, size: int, p0: Fraction, p1: Fraction) -> Fraction:
    pairs = size * (size - 1) // 2
    return (p1 / p0) ** W * ((1 - p1) / (1 - p0)) ** (pairs - W)


def ls(g: Graph, S, p0: Number, p1: Number) -> Number:
    """``L_S = exp(theta W_S - Lambda(theta) |S|(|S|-1)/2)``.

    Rational inputs give a rational result computed exactly.
    """
    S = np.unique(np.asarray(S, dtype=np.int64))
    if len(S) < 2:
        raise ValueError("|S| must be at least 2")
    W = induced(g, S).num_edges
    if isinstance(p0, Fraction) and isinstance(p1, Fraction):
        _check_pair(p0, p1)
        return _ls_exact(W, len(S), p0, p1)
    return math.exp(log_ls(W, len(S), float(p0), float(p1)))


def _as_exact(p: Number) -> Fraction:
    # Fraction(float) is exact, so dyadic inputs stay exact
    return p if isinstance(p, Fraction) else Fraction(p)


def _stable_mean_exp(logs: np.ndarray) -> float:
    if len(logs) == 0:
        return 0.0
    top = float(np.max(logs))
    return math.exp(top) * math.fsum(np.exp(logs - top).tolist()) / len(logs)


# --- averaged likelihood ---------------------------------------------------

def full_L(g: Graph, n: int, p0: Number, p1: Number,
           trunc: TruncationEvent = TruncationEvent(), *, exact: bool = False,
           subset_cap: int = SUBSET_CAP) -> Number:
    """Average of ``L_S 1{Gamma_S}`` over all size-``n`` subsets S."""
    N = g.num_vertices
    if not (2 <= n <= N):
        raise ValueError("need 2 <= n <= N")
    total = math.comb(N, n)
    if total > subset_cap:
        raise FeasibilityError(f"C({N},{n}) = {total} subsets exceeds cap {subset_cap}")
    _check_pair(p0, p1)
    combos = np.array(list(itertools.combinations(range(N), n)), dtype=np.int64)
    A = g.to_dense().astype(np.int64)
    W = np.zeros(len(combos), dtype=np.int64)
    for a, b in itertools.combinations(range(n), 2):
        W += A[combos[:, a], combos[:, b]]
    keep = np.ones(len(combos), dtype=bool)
    if trunc.kind != "none":
        for i, S in enumerate(combos):
            keep[i] = trunc.holds(induced(g, S))
    if exact:
        q0, q1 = _as_exact(p0), _as_exact(p1)
        acc = sum((_ls_exact(int(w), n, q0, q1) for w in W[keep]), Fraction(0))
        return acc / total
    theta, lam, _ = tilt(float(p0), float(p1))
    logs = theta * W[keep] - lam * n * (n - 1) / 2
    return _stable_mean_exp(logs) * keep.sum() / total


# --- exhaustive moments ------------------------------------------------------

@dataclass(frozen=True)
class ExhaustiveMoments:
    E0_L: Number
    E0_L2: Number
    E0_Lt: Number
    E0_Lt2: Number
    P_S_Gamma: Number


def event_probability(n: int, p1: Number, trunc: TruncationEvent, *,
                      exact: bool = False) -> Number:
    """``P(Gamma)`` for G(n, p1) by summing over all graphs on n vertices."""
    if n > EXHAUSTIVE_CAP:
        raise FeasibilityError(f"exhaustive sum needs n <= {EXHAUSTIVE_CAP}")
    pairs = list(itertools.combinations(range(n), 2))
    M = len(pairs)
    q = _as_exact(p1) if exact else float(p1)
    one = Fraction(1) if exact else 1.0
    terms = []
    for mask in range(1 << M):
        edges = [pairs[i] for i in range(M) if mask >> i & 1]
        if trunc.holds(Graph(n, edges)):
            m = len(edges)
            terms.append(q**m * (one - q) ** (M - m))
    if exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def exhaustive_moments(N: int, n: int, p0: Number, p1: Number,
                       trunc: TruncationEvent = TruncationEvent(), *,
                       exact: bool = False) -> ExhaustiveMoments:
    """Exact null moments of ``L`` and ``L~`` by summing over all graphs on N vertices.

    Also computes ``P_S(Gamma_S)`` on n vertices and raises
    :class:`InvariantError` unless it equals ``E0[L~]`` (exactly in rational
    mode, to 1e-12 otherwise).
    """
    if N > EXHAUSTIVE_CAP:
        raise FeasibilityError(f"exhaustive sum needs N <= {EXHAUSTIVE_CAP}")
    if not (2 <= n <= N):
        raise ValueError("need 2 <= n <= N")
    _check_pair(p0, p1)
    pairs = list(itertools.combinations(range(N), 2))
    M = len(pairs)
    subsets = list(itertools.combinations(range(N), n))
    inside = []
    for S in subsets:
        bits = 0
        for i, (a, b) in enumerate(pairs):
            if a in S and b in S:
                bits |= 1 << i
        inside.append(bits)

    if exact:
        q0, q1 = _as_exact(p0), _as_exact(p1)
        zero, one = Fraction(0), Fraction(1)

        def lterm(W: int) -> Fraction:
            return _ls_exact(W, n, q0, q1)
    else:
        q0, q1 = float(p0), float(p1)
        zero, one = 0.0, 1.0
        theta, lam, _ = tilt(q0, q1)
        base = lam * n * (n - 1) / 2

        def lterm(W: int) -> float:
            return math.exp(theta * W - base)

    gamma_cache: dict[tuple[int, int], bool] = {}
    acc = {"L": [], "L2": [], "Lt": [], "Lt2": []}
    for mask in range(1 << M):
        m = bin(mask).count("1")
        weight = q0**m * (one - q0) ** (M - m)
        edges = None
        L = Lt = zero
        for idx, S in enumerate(subsets):
            sub = mask & inside[idx]
            term = lterm(bin(sub).count("1"))
            L += term
            key = (idx, sub)
            if key not in gamma_cache:
                if edges is None:
                    edges = [pairs[i] for i in range(M) if mask >> i & 1]
                gamma_cache[key] = trunc.holds(induced(Graph(N, edges), S))
            if gamma_cache[key]:
                Lt += term
        L /= len(subsets)
        Lt /= len(subsets)
        acc["L"].append(weight * L)
        acc["L2"].append(weight * L * L)
        acc["Lt"].append(weight * Lt)
        acc["Lt2"].append(weight * Lt * Lt)

    if exact:
        out = {k: sum(v, Fraction(0)) for k, v in acc.items()}
    else:
        out = {k: math.fsum(v) for k, v in acc.items()}
    p_gamma = event_probability(n, p1, trunc, exact=exact)
    if exact:
        agree = out["Lt"] == p_gamma
    else:
        agree = abs(out["Lt"] - p_gamma) <= 1e-12
    if not agree:
        raise InvariantError(f"E0[L~] = {out['Lt']} differs from P_S(Gamma) = {p_gamma}")
    return ExhaustiveMoments(out["L"], out["L2"], out["Lt"], out["Lt2"], p_gamma)


def hypergeometric_second_moment(N: int, n: int, p0: float, p1: float) -> float:
    """``E0[L^2] = E[exp(Delta K(K-1)/2)]`` with ``K ~ Hyp(N, n, n)``."""
    _check_pair(p0, p1)
    _, _, delta = tilt(p0, p1)
    ks = np.arange(max(0, 2 * n - N), n + 1)
    pmf = hypergeom.pmf(ks, N, n, n)
    return float(math.fsum((pmf * np.exp(delta * ks * (ks - 1) / 2)).tolist()))


def risk_lower_bound(E0_Lt: float, E0_Lt2: float) -> float:
    """Risk floor ``(4/27) E0[L~]^3 / E0[L~^2]``, with 0/0 read as 0."""
    if E0_Lt < 0:
        raise ValueError("E0_Lt must be nonnegative")
    if E0_Lt == 0:
        return 0.0
    if E0_Lt2 <= 0:
        raise ValueError("E0_Lt2 must be positive")
    return 4.0 / 27.0 * float(E0_Lt) ** 3 / float(E0_Lt2)


# --- Monte-Carlo counterparts -----------------------------------------------

@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    R: int


def _estimate(values: np.ndarray) -> Estimate:
    R = len(values)
    se = float(values.std(ddof=1) / math.sqrt(R)) if R > 1 else math.inf
    return Estimate(float(values.mean()), se, R)


def mc_truncated_mean(N: int, n: int, p0: float, p1: float, trunc: TruncationEvent,
                      R: int, seed: int) -> Estimate:
    """Estimate ``E0[L~]`` as the null mean of ``L_S 1{Gamma_S}`` for a uniform S.

    By exchangeability this has the same expectation as the full average
    over subsets.
    """
    _check_pair(p0, p1)
    rng = make_rng(seed)
    vals = np.empty(R)
    for r in range(R):
        g = gen_er(N, p0, rng)
        S = np.sort(rng.choice(N, size=n, replace=False))
        h = induced(g, S)
        vals[r] = math.exp(log_ls(h.num_edges, n, p0, p1)) if trunc.holds(h) else 0.0
    return _estimate(vals)


def mc_event_probability(n: int, p1: float, trunc: TruncationEvent, R: int,
                         seed: int) -> Estimate:
    """Estimate ``P_S(Gamma_S)`` from R draws of G(n, p1)."""
    rng = make_rng(seed)
    vals = np.array([float(trunc.holds(gen_er(n, p1, rng))) for _ in range(R)])
    return _estimate(vals)
