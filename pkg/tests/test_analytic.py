import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binom

from sparse_community.analytic import (
    BoundaryMinimizerError, InteriorMinimizerWarning, RateParams, binomial_bounds,
    chernoff_tail, cycle_intensity, delta_k, delta_k_objective, entropy_h, eta,
    kl_bernoulli, legendre_dual, log_mgf_bernoulli, rate_I, signal_zeta, tilt,
)

# reference values computed independently at 40 digits
KL_02_01 = 0.04440300758688229825
KL_09_05 = 0.36806420716849706991
ETA_2 = 0.20318786997997995384
ETA_4 = 0.01982740128177841411
THETA_01_02 = 0.81093021621632876396
DELTA_01_02 = 0.10536051565782630123
DELTA_K5 = 1.61446308036085109519
DELTA_K101 = 0.04109648262682262326


class TestKL:
    def test_equal_args(self):
        assert kl_bernoulli(0.3, 0.3) == 0.0

    @pytest.mark.parametrize("q,p,want", [(0.2, 0.1, KL_02_01), (0.9, 0.5, KL_09_05)])
    def test_values(self, q, p, want):
        assert kl_bernoulli(q, p) == pytest.approx(want, rel=1e-13)

    @pytest.mark.parametrize("q,p", [(0.0, 0.5), (0.5, 1.0), (-0.1, 0.2), (0.3, 1.5)])
    def test_domain(self, q, p):
        with pytest.raises(ValueError):
            kl_bernoulli(q, p)

    def test_poisson_approximation_gap(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            p, q = np.sort(rng.uniform(1e-4, 0.9, size=2))
            kl = kl_bernoulli(q, p)
            lower = p * entropy_h(q / p)
            assert kl >= lower - 1e-12
            assert kl - lower <= 2 * q * q / (1 - q) + 1e-12

    @given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
    def test_nonnegative(self, q, p):
        assert kl_bernoulli(q, p) >= 0


class TestRateAndEta:
    def test_rate(self):
        assert rate_I(1.0) == 0.0
        assert rate_I(math.e) == pytest.approx(math.e - 2, rel=1e-14)
        assert rate_I(0.5) == pytest.approx(0.19314718055994530942, rel=1e-14)
        with pytest.raises(ValueError):
            rate_I(0.0)

    def test_rate_tiny_argument(self):
        assert rate_I(1e-300) == pytest.approx(-1 + 300 * math.log(10), rel=1e-12)

    def test_eta_subcritical(self):
        assert eta(0.7) == 1.0
        assert eta(1.0) == 1.0

    @pytest.mark.parametrize("lam,want", [(2.0, ETA_2), (4.0, ETA_4)])
    def test_eta_values(self, lam, want):
        assert eta(lam) == pytest.approx(want, abs=1e-12)

    def test_eta_residual_and_bounds(self):
        prev = 0.0
        for lam in np.geomspace(1.0001, 100, 200):
            e = eta(lam)
            assert abs(e - math.exp(lam * (e - 1))) < 1e-12
            assert e < 1 / lam
            f = lam * (1 + e)
            assert f > prev
            prev = f

    def test_eta_domain(self):
        with pytest.raises(ValueError):
            eta(-1.0)


class TestTilt:
    def test_null(self):
        assert tilt(0.1, 0.1) == (0.0, 0.0, 0.0)

    def test_values(self):
        theta, lam, delta = tilt(0.1, 0.2)
        assert theta == pytest.approx(THETA_01_02, rel=1e-14)
        assert delta == pytest.approx(DELTA_01_02, rel=1e-14)
        assert lam == pytest.approx(log_mgf_bernoulli(theta, 0.1), rel=1e-14)

    @given(st.floats(1e-4, 0.5), st.floats(0.0, 0.49))
    def test_delta_two_forms(self, p0, gap):
        p1 = p0 + gap
        theta, lam, delta = tilt(p0, p1)
        assert delta == pytest.approx(log_mgf_bernoulli(2 * theta, p0) - 2 * lam, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            tilt(0.3, 0.2)


class TestLegendre:
    def test_values(self):
        assert legendre_dual(0.2, 0.1) == pytest.approx(THETA_01_02, rel=1e-14)
        assert legendre_dual(0.9, 0.1) == pytest.approx(math.log(81), rel=1e-14)

    def test_limit(self):
        assert abs(legendre_dual(0.5, 0.5 - 1e-9)) < 1e-8

    def test_duality_grid(self):
        for p0 in np.linspace(0.01, 0.8, 20):
            for q in np.linspace(p0 + 0.01, 0.99, 20):
                th = legendre_dual(q, p0)
                assert kl_bernoulli(q, p0) == pytest.approx(
                    q * th - log_mgf_bernoulli(th, p0), abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            legendre_dual(0.1, 0.2)


class TestDeltaK:
    def test_first_term_vanishes(self):
        assert delta_k(0.01, 0.5, 5) == pytest.approx(DELTA_K5, rel=1e-13)
        assert delta_k(0.01, 0.5, 5) == kl_bernoulli(0.5, 0.01)

    def test_matches_grid_minimization(self):
        for p0, p1, k in [(0.001, 0.02, 101), (0.01, 0.3, 8), (0.05, 0.5, 6)]:
            theta = tilt(p0, p1)[0]
            # coarse pass, then a fine pass around the coarse minimizer
            xs = np.linspace(0.0, 2 * theta, 200_001)
            i = int(np.argmin([delta_k_objective(x, p0, p1, k) for x in xs[::100]])) * 100
            grid = min(delta_k_objective(x, p0, p1, k) for x in xs[max(0, i - 200):i + 201])
            assert delta_k(p0, p1, k) == pytest.approx(grid, abs=1e-10)

    def test_value_k101(self):
        assert delta_k(0.001, 0.02, 101) == pytest.approx(DELTA_K101, rel=1e-12)

    def test_boundary_reported(self):
        # q_k = 0.5 is far above p1 = 0.05, so 2 theta < theta_q
        with pytest.raises(BoundaryMinimizerError):
            delta_k(0.01, 0.05, 5)
        with pytest.warns(InteriorMinimizerWarning):
            assert delta_k(0.01, 0.05, 5, fallback=True) == tilt(0.01, 0.05)[2]

    def test_small_k(self):
        with pytest.raises(ValueError):
            delta_k(0.01, 0.5, 3)


class TestZetaAndOthers:
    def test_zeta(self):
        assert signal_zeta(100, 10, 0.1, 0.1) == 0.0
        assert signal_zeta(100, 10, 0.1, 0.2) == pytest.approx(0.1, rel=1e-13)
        assert signal_zeta(10000, 100, 0.001, 0.01) == pytest.approx(0.081, rel=1e-13)

    def test_rate_params(self):
        rp = RateParams.from_probabilities(1000, 10, 0.002, 0.3)
        assert rp.lambda0 == 1000 * 0.002 and rp.lambda1 == 10 * 0.3
        assert rp.alpha == pytest.approx(math.log(2) / math.log(100))
        assert rp.zeta == signal_zeta(1000, 10, 0.002, 0.3)

    def test_cycle_intensity(self):
        assert cycle_intensity(0.0) == 0.0
        assert cycle_intensity(0.5) == pytest.approx(0.03407359027997265471, rel=1e-13)
        assert cycle_intensity(0.9) == pytest.approx(0.49879254649702284201, rel=1e-13)
        vals = [cycle_intensity(x) for x in np.linspace(0, 0.99, 100)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        with pytest.raises(ValueError):
            cycle_intensity(1.0)

    def test_chernoff(self):
        assert chernoff_tail(10, 0.3, 0.3) == 1.0
        assert chernoff_tail(10, 0.1, 0.2) == pytest.approx(0.64144612848758697510, rel=1e-12)
        c = chernoff_tail(20, 0.1, 0.5)
        assert c == pytest.approx(3.656158440062976e-05, rel=1e-10)
        assert c >= binom.sf(9, 20, 0.1)

    def test_chernoff_dominates_exact_tail(self):
        for n in range(1, 31):
            for p in (0.05, 0.2, 0.5, 0.7):
                for q in np.linspace(p, 0.99, 12):
                    tail = binom.sf(math.ceil(q * n - 1e-12) - 1, n, p)
                    assert chernoff_tail(n, p, q) >= tail - 1e-15

    def test_binomial_bounds(self):
        for n in range(1, 40):
            for k in range(1, n + 1):
                lo, hi = binomial_bounds(n, k)
                assert lo <= math.comb(n, k) * (1 + 1e-12) and math.comb(n, k) <= hi * (1 + 1e-12)
