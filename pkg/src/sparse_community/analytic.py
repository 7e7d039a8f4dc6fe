"""Closed-form scalar functions for sparse planted-subgraph detection.

Everything here is a pure function of floats. Probabilities are handled with
``log1p``/``expm1`` where the naive form loses precision near 0 or 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


class InteriorMinimizerWarning(UserWarning):
    """The tilted minimization hit the boundary; the Delta value was used."""


class BoundaryMinimizerError(ValueError):
    """Raised by :func:`delta_k` when the minimizer is not interior."""


def _check_open_unit(name: str, x: float) -> None:
    if not (0.0 < x < 1.0):
        raise ValueError(f"{name} must lie in (0, 1), got {x!r}")


def _xlogy_ratio(x: float, y: float) -> float:
    # x * log(x / y) with the 0 log 0 = 0 convention
    if x == 0.0:
        return 0.0
    return x * math.log(x / y)


@dataclass(frozen=True)
class RateParams:
    """Derived rate parameters of a planted instance (N, n, p0, p1)."""

    lambda0: float
    lambda1: float
    alpha: float
    zeta: float

    @classmethod
    def from_probabilities(cls, N: int, n: int, p0: float, p1: float) -> "RateParams":
        if not (2 <= n < N):
            raise ValueError("need 2 <= n < N")
        lambda0 = N * p0
        lambda1 = n * p1
        alpha = math.log(lambda0) / math.log(N / n)
        return cls(lambda0, lambda1, alpha, signal_zeta(N, n, p0, p1))


def kl_bernoulli(q: float, p: float) -> float:
    """Relative entropy of Bern(q) to Bern(p)."""
    _check_open_unit("q", q)
    _check_open_unit("p", p)
    if q == p:
        return 0.0
    # second term via log1p for accuracy when q and p are small
    val = q * math.log(q / p) + (1.0 - q) * (math.log1p(-q) - math.log1p(-p))
    return max(val, 0.0)


def rate_I(lam: float) -> float:
    """Large-deviation rate ``lam - 1 - log(lam)`` of subcritical clusters."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    # log1p near 1 keeps precision around the minimum
    if abs(lam - 1.0) < 0.5:
        return (lam - 1.0) - math.log1p(lam - 1.0)
    return (lam - 1.0) - math.log(lam)


def eta(lam: float) -> float:
    """Smallest root of ``x = exp(lam * (x - 1))`` on [0, 1].

    Returns 1 for ``lam <= 1``. For supercritical ``lam`` the root is found by
    bisection in ``y = x - 1``, where ``expm1`` keeps the sign of the objective
    reliable even as the root approaches 1.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if lam <= 1.0:
        return 1.0

    def g(y: float) -> float:
        return y - math.expm1(lam * y)

    lo, hi = -1.0, -1e-15  # g(lo) < 0 < g(hi)
    for _ in range(400):
        if hi - lo <= 1e-13:
            break
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 1.0 + 0.5 * (lo + hi)


def log_mgf_bernoulli(t: float, p0: float) -> float:
    """Cumulant generating function ``log(1 - p0 + p0 e^t)`` of Bern(p0)."""
    return math.log1p(p0 * math.expm1(t))


def legendre_dual(q: float, p0: float) -> float:
    """Tilt ``theta_q = log(q (1 - p0) / (p0 (1 - q)))`` dual to ``q``."""
    _check_open_unit("q", q)
    _check_open_unit("p0", p0)
    if q <= p0:
        raise ValueError(f"q must exceed p0 ({q!r} <= {p0!r})")
    return math.log(q / p0) + math.log1p(-p0) - math.log1p(-q)


def tilt(p0: float, p1: float) -> tuple[float, float, float]:
    """Return ``(theta, Lambda(theta), Delta)`` for the pair (p0, p1).

    ``Delta`` uses the closed form ``log(1 + (p1 - p0)^2 / (p0 (1 - p0)))``,
    which equals ``Lambda(2 theta) - 2 Lambda(theta)``.
    """
    _check_open_unit("p0", p0)
    _check_open_unit("p1", p1)
    if p1 < p0:
        raise ValueError("need p0 <= p1")
    if p1 == p0:
        return 0.0, 0.0, 0.0
    theta = legendre_dual(p1, p0)
    # Lambda(theta) = log((1 - p0) / (1 - p1))
    lam_theta = math.log1p(-p0) - math.log1p(-p1)
    delta = math.log1p((p1 - p0) ** 2 / (p0 * (1.0 - p0)))
    return theta, lam_theta, delta


def delta_k(p0: float, p1: float, k: int, fallback: bool = False) -> float:
    """Tilted second-moment exponent for overlap size ``k``.

    Computes ``min over xi in [0, 2 theta]`` of
    ``Lambda(xi) + (2 theta - xi) q_k - 2 Lambda(theta)`` with ``q_k = 2/(k-1)``.
    When the minimizer is interior this is ``-2 H_{p1}(q_k) + H_{p0}(q_k)``.
    Otherwise the objective is decreasing on the whole interval and the minimum
    is the plain ``Delta``; this is only returned when ``fallback`` is set, and a
    :class:`InteriorMinimizerWarning` is issued.
    """
    if k < 4:
        raise ValueError("k must be at least 4")
    q = 2.0 / (k - 1)
    _check_open_unit("p0", p0)
    _check_open_unit("p1", p1)
    theta, _, delta = tilt(p0, p1)
    interior = q > p0 and 2.0 * theta >= legendre_dual(q, p0)
    if not interior:
        if not fallback:
            raise BoundaryMinimizerError(
                f"minimizer not interior for p0={p0}, p1={p1}, k={k}"
            )
        warnings.warn(
            f"boundary minimizer at k={k}; returning Delta", InteriorMinimizerWarning
        )
        return delta
    first = 0.0 if q == p1 else kl_bernoulli(q, p1)
    return -2.0 * first + kl_bernoulli(q, p0)


def delta_k_objective(xi: float, p0: float, p1: float, k: int) -> float:
    """The function of ``xi`` minimized by :func:`delta_k`."""
    theta, lam_theta, _ = tilt(p0, p1)
    q = 2.0 / (k - 1)
    return log_mgf_bernoulli(xi, p0) + (2.0 * theta - xi) * q - 2.0 * lam_theta


def signal_zeta(N: int, n: int, p0: float, p1: float) -> float:
    """Total-degree signal ``(p1 - p0)^2 / p0 * n^4 / N^2``."""
    if not (2 <= n < N):
        raise ValueError("need 2 <= n < N")
    _check_open_unit("p0", p0)
    _check_open_unit("p1", p1)
    if p1 < p0:
        raise ValueError("need p0 <= p1")
    return (p1 - p0) ** 2 / p0 * (n / N) ** 2 * n**2


def cycle_intensity(lam: float) -> float:
    """Poisson mean of the cycle count of G(n, lam/n) for ``0 <= lam < 1``."""
    if not (0.0 <= lam < 1.0):
        raise ValueError(f"lambda must lie in [0, 1), got {lam!r}")
    return -0.5 * math.log1p(-lam) - lam / 2.0 - lam**2 / 4.0


def chernoff_tail(n: int, p: float, q: float) -> float:
    """Upper bound ``exp(-n H_p(q))`` on ``P(Bin(n, p) >= q n)``."""
    _check_open_unit("p", p)
    _check_open_unit("q", q)
    if q < p:
        raise ValueError("need q >= p")
    if n < 1:
        raise ValueError("n must be a positive integer")
    return math.exp(-n * kl_bernoulli(q, p))


def entropy_h(x: float) -> float:
    """``h(x) = x log x - x + 1``, the Poisson-limit rate function."""
    return _xlogy_ratio(x, 1.0) - x + 1.0


def binomial_bounds(n: int, k: int) -> tuple[float, float]:
    """Bounds ``((n/k)^k, (e n / k)^k)`` bracketing ``C(n, k)``."""
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= n")
    return (n / k) ** k, (math.e * n / k) ** k
