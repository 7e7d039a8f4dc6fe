"""Monte-Carlo calibration, power and risk, detection diagrams and the
theoretical boundary curves drawn over them.

Replicate ``r`` of a null sample draws its graph from
``derive_seed(seed, r, NULL_STREAM)``; alternatives use ``ALT_STREAM``.
Replicates may run on several threads, but results are always collected in
replicate order, so the thread count never changes any output.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .analytic import rate_I
from .graphs import Graph, derive_seed, gen_er, gen_planted
from .statistics import STATISTICS, evaluate

NULL_STREAM = 0
ALT_STREAM = 1
MIN_REPLICATES = 100
INTEGER_STATISTICS = frozenset({"total_degree", "scan", "largest_cc", "triangles", "ktree"})
KTREE_FALLBACK_C = 1.0
DIAGRAM_COLUMNS = ("lambda0", "lambda1", "test", "t", "type1", "type2", "risk", "R", "seed")
CURVE_COLUMNS = ("curve_name", "lambda0", "lambda1")


@dataclass(frozen=True)
class TestSpec:
    """A registered statistic with fixed parameters; large values reject."""

    __test__ = False  # not a pytest class

    name: str
    params: dict = field(default_factory=dict)
    direction: str = "greater"

    def __post_init__(self):
        if self.name not in STATISTICS:
            raise ValueError(f"unknown statistic {self.name!r}; known: {sorted(STATISTICS)}")
        if self.direction != "greater":
            raise ValueError("only rejection for large values is supported")

    def __call__(self, g: Graph) -> float:
        return evaluate(self.name, g, **self.params)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.name}[{inner}]"


@dataclass(frozen=True)
class CalibrationResult:
    t: float
    level: float
    achieved: float
    R: int
    seed: int


@dataclass(frozen=True)
class PowerEstimate:
    power: float
    se: float
    R: int


@dataclass(frozen=True)
class RiskResult:
    type1: float
    type2: float
    risk: float


def _check_R(R: int) -> None:
    if R < MIN_REPLICATES:
        raise ValueError(f"need at least {MIN_REPLICATES} replicates, got {R}")


def _run(task: Callable[[int], float], R: int, threads: int) -> np.ndarray:
    if threads <= 1:
        return np.array([task(r) for r in range(R)], dtype=float)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.fromiter(pool.map(task, range(R)), dtype=float, count=R)


def null_sample(spec: TestSpec, N: int, p0: float, R: int, seed: int,
                threads: int = 1) -> np.ndarray:
    """Statistic values on R null graphs, in replicate order."""
    return _run(lambda r: spec(gen_er(N, p0, derive_seed(seed, r, NULL_STREAM))), R, threads)


def alt_sample(spec: TestSpec, N: int, p0: float, n: int, p1: float, R: int, seed: int,
               threads: int = 1) -> np.ndarray:
    """Statistic values on R planted graphs, in replicate order."""
    return _run(lambda r: spec(gen_planted(N, p0, n, p1,
                                           derive_seed(seed, r, ALT_STREAM)).graph), R, threads)


def critical_value(values: np.ndarray, level: float, integer: bool = True) -> float:
    """Smallest observed threshold ``t`` with empirical ``P(stat >= t) <= level``.

    If no observed value qualifies, the next value above the maximum is used
    (``max + 1`` for integer statistics).
    """
    if level >= 1:
        return -math.inf
    if level <= 0:
        raise ValueError("level must be positive")
    v = np.sort(np.asarray(values, dtype=float))
    R = len(v)
    uniq = np.unique(v)
    # exceed[i] = #{values >= uniq[i]}
    exceed = R - np.searchsorted(v, uniq, side="left")
    ok = np.flatnonzero(exceed <= level * R)
    if len(ok):
        return float(uniq[ok[0]])
    top = float(v[-1])
    return top + 1.0 if integer else float(np.nextafter(top, math.inf))


def calibrate(spec: TestSpec, N: int, p0: float, level: float, R: int, seed: int,
              threads: int = 1) -> CalibrationResult:
    if level >= 1:
        return CalibrationResult(-math.inf, level, 1.0, R, seed)
    _check_R(R)
    values = null_sample(spec, N, p0, R, seed, threads)
    t = critical_value(values, level, spec.name in INTEGER_STATISTICS)
    return CalibrationResult(t, level, float(np.mean(values >= t)), R, seed)


def _rate(values: np.ndarray, t: float) -> float:
    return float(np.mean(values >= t))


def power(spec: TestSpec, N: int, p0: float, n: int, p1: float, t: float, R: int,
          seed: int, threads: int = 1) -> PowerEstimate:
    """Rejection rate over planted graphs with a uniform community.

    Every size-n community has the same rejection probability by relabelling,
    so the uniform draw gives the worst case exactly.
    """
    _check_R(R)
    if t == -math.inf:
        return PowerEstimate(1.0, 0.0, R)
    if t == math.inf:
        return PowerEstimate(0.0, 0.0, R)
    p = _rate(alt_sample(spec, N, p0, n, p1, R, seed, threads), t)
    return PowerEstimate(p, math.sqrt(p * (1 - p) / R), R)


def risk(spec: TestSpec, N: int, p0: float, n: int, p1: float, t: float, R: int,
         seed: int, threads: int = 1) -> RiskResult:
    """Empirical type-I error plus type-II error at threshold ``t``."""
    _check_R(R)
    if math.isinf(t):
        type1 = 1.0 if t < 0 else 0.0
    else:
        type1 = _rate(null_sample(spec, N, p0, R, seed, threads), t)
    type2 = 1.0 - power(spec, N, p0, n, p1, t, R, seed, threads).power
    return RiskResult(type1, type2, type1 + type2)


# --- detection diagram ---------------------------------------------------

@dataclass(frozen=True)
class DiagramCell:
    lambda0: float
    lambda1: float
    test: str
    t: float
    type1: float
    type2: float
    risk: float
    R: int
    seed: int
    valid: bool


@dataclass(frozen=True)
class DiagramGrid:
    N: int
    n: int
    lambda0s: tuple[float, ...]
    lambda1s: tuple[float, ...]
    cells: tuple[DiagramCell, ...]

    def cell(self, lambda0: float, lambda1: float, test: str) -> DiagramCell:
        for c in self.cells:
            if c.lambda0 == lambda0 and c.lambda1 == lambda1 and c.test == test:
                return c
        raise KeyError((lambda0, lambda1, test))


def diagram(N: int, n: int, lambda0s: Sequence[float], lambda1s: Sequence[float],
            specs: Sequence[TestSpec | Callable[[float, float], TestSpec]], level: float,
            R: int, seed: int, threads: int = 1) -> DiagramGrid:
    """Calibrated risk of every test at every (lambda0, lambda1) cell.

    An entry of ``specs`` may also be a function of ``(lambda0, lambda1)``
    returning the test for that cell. Null calibrations are shared by all
    cells of a row with the same resolved test. All cells use the same master
    seed, so neighbouring cells share their random draws and differences
    between cells are not masked by noise. A cell with ``p1 < p0`` or a
    probability above 1 is marked invalid.
    """
    if not lambda0s or not lambda1s or not specs:
        raise ValueError("grid and test list must be nonempty")
    cells = []
    for lam0 in lambda0s:
        p0 = lam0 / N
        null_ok = 0 <= p0 <= 1
        cal = {}
        for lam1 in lambda1s:
            p1 = lam1 / n
            valid = null_ok and p0 <= p1 <= 1
            for entry in specs:
                spec = entry if isinstance(entry, TestSpec) else entry(lam0, lam1)
                if not valid:
                    nan = math.nan
                    cells.append(DiagramCell(lam0, lam1, spec.label, nan, nan, nan, nan,
                                             R, seed, False))
                    continue
                if spec.label not in cal:
                    cal[spec.label] = calibrate(spec, N, p0, level, R, seed, threads)
                c = cal[spec.label]
                pw = power(spec, N, p0, n, p1, c.t, R, seed, threads)
                type2 = 1.0 - pw.power
                cells.append(DiagramCell(lam0, lam1, spec.label, c.t, c.achieved, type2,
                                         c.achieved + type2, R, seed, True))
    return DiagramGrid(N, n, tuple(lambda0s), tuple(lambda1s), tuple(cells))


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_diagram_csv(grid: DiagramGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGRAM_COLUMNS)
        for c in grid.cells:
            w.writerow([_fmt(getattr(c, col)) for col in DIAGRAM_COLUMNS])


# --- boundary curves -----------------------------------------------------

@dataclass(frozen=True)
class Curve:
    name: str
    points: tuple[tuple[float, float], ...]


def _invert_rate_below_one(target: float) -> float:
    """The ``lam < 1`` with ``I_lam = target``."""
    if target <= 0:
        return 1.0
    return brentq(lambda x: rate_I(x) - target, 1e-300, 1.0, xtol=1e-15)


def ktree_margin(N: int, n: int, lambda0: float, lambda1: float) -> float:
    """Right side minus left side of the k-tree feasibility inequality.

    Positive inside the region where the k-tree test is powerful; NaN outside
    the domain ``sqrt(lambda0 / e) < lambda1 < 1`` where the inequality applies.
    """
    if not (math.sqrt(lambda0 / math.e) < lambda1 < 1):
        return math.nan
    r = lambda0 / (lambda1 * math.e)
    lhs = math.log(N / n**2) / math.log(n)
    rhs = (rate_I(r) - rate_I(math.sqrt(lambda0 / math.e))) / (
        (1 - r) * rate_I(math.sqrt(lambda1) / math.e))
    return rhs - lhs


def boundary_curves(N: int, n: int, lambda0s: Iterable[float] | None = None) -> list[Curve]:
    """Finite-N contours of each detection boundary over a lambda0 grid.

    ``total_degree_zeta1``: the total-degree signal equals 1.
    ``broad_scan_lambda1_1``: lambda1 = 1, drawn for supercritical lambda0.
    ``cc_subcritical``: I_{lambda0} log n = I_{lambda1} log N with lambda1 < 1.
    ``cc_subcritical_full``: the same boundary without the small-lambda
    simplification, I_{lambda0} log n = (lambda0 + I_{lambda1} -
    lambda0 e^{I_{lambda1}}) log N.
    ``no_powerful_test``: lambda1 = sqrt(lambda0 / e).
    ``ktree``: zero set of :func:`ktree_margin`; the feasible region is further
    bounded by the ``no_powerful_test`` curve and lambda1 = 1.
    """
    if not (2 <= n < N):
        raise ValueError("need 2 <= n < N")
    grid = list(lambda0s) if lambda0s is not None else np.logspace(-2, 1, 61).tolist()
    ratio = math.log(n) / math.log(N)
    zeta, scan_line, cc, cc_full, frontier, ktree = [], [], [], [], [], []
    for lam0 in grid:
        zeta.append((lam0, lam0 * n / N + math.sqrt(lam0 * N) / n))
        if lam0 > 1:
            scan_line.append((lam0, 1.0))
        frontier.append((lam0, math.sqrt(lam0 / math.e)))
        if lam0 < 1:
            target = rate_I(lam0) * ratio
            cc.append((lam0, _invert_rate_below_one(target)))
            # h(x) = lam0 + x - lam0 e^x rises from 0 to I_{lam0} at x = -log(lam0)
            h = lambda x: lam0 + x - lam0 * math.exp(x) - target  # noqa: E731
            x = brentq(h, 0.0, -math.log(lam0), xtol=1e-15)
            cc_full.append((lam0, _invert_rate_below_one(x)))
        lo = math.sqrt(lam0 / math.e)
        if lo >= 1:
            continue
        l1 = np.linspace(lo, 1.0, 402)[1:-1]
        m = np.array([ktree_margin(N, n, lam0, x) for x in l1])
        for i in np.flatnonzero(np.sign(m[:-1]) * np.sign(m[1:]) < 0):
            root = brentq(lambda x: ktree_margin(N, n, lam0, x), l1[i], l1[i + 1], xtol=1e-14)
            ktree.append((lam0, root))
    return [
        Curve("total_degree_zeta1", tuple(zeta)),
        Curve("broad_scan_lambda1_1", tuple(scan_line)),
        Curve("cc_subcritical", tuple(cc)),
        Curve("cc_subcritical_full", tuple(cc_full)),
        Curve("no_powerful_test", tuple(frontier)),
        Curve("ktree", tuple(ktree)),
    ]


def write_curves_csv(curves: Sequence[Curve], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for c in curves:
            for lam0, lam1 in c.points:
                w.writerow([c.name, repr(float(lam0)), repr(float(lam1))])


# --- k-tree parameter ------------------------------------------------------

def ktree_c_interval(N: int, n: int, lambda0: float, lambda1: float) -> tuple[float, float]:
    """Admissible range ``(c_lower, c_upper)`` for ``k = c log n``.

    Empty (lower >= upper) when the feasibility inequality fails.
    """
    if not (math.sqrt(lambda0 / math.e) < lambda1 < 1):
        return math.inf, 0.0
    r = lambda0 / (lambda1 * math.e)
    c_upper = 1.0 / (2.0 * (1.0 - r) * rate_I(math.sqrt(lambda1) / math.e))
    # positive because r < sqrt(lambda0 / e) < 1 in the domain
    gap = rate_I(r) - rate_I(math.sqrt(lambda0 / math.e))
    c_lower = max(0.0, (math.log(N / n**2) / math.log(n)) / (2.0 * gap))
    return c_lower, c_upper


def ktree_default_k(N: int, n: int, lambda0: float, lambda1: float,
                    c: float | None = None) -> int:
    """Tree size ``k = round(c log n)``, at least 2.

    Without an explicit ``c`` the midpoint of :func:`ktree_c_interval` is used,
    or :data:`KTREE_FALLBACK_C` when that interval is empty.
    """
    if c is None:
        lo, hi = ktree_c_interval(N, n, lambda0, lambda1)
        c = 0.5 * (lo + hi) if lo < hi else KTREE_FALLBACK_C
    return max(2, round(c * math.log(n)))
