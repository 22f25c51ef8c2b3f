import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from intrinsicopt import (DomainError, MarketParams, atm_forward_call,
                          bs_call, bs_put, expected_local_time, norm_cdf,
                          rho, z)


def lognormal_call_oracle(s, K, tau, sigma, r):
    """Quadrature over the lognormal terminal density; independent of the
    closed-form evaluation path."""
    if tau == 0:
        return max(s - K, 0.0)
    mu = math.log(s) + (r - 0.5 * sigma**2) * tau
    sd = sigma * math.sqrt(tau)

    def integrand(x):
        return (math.exp(x) - K) * math.exp(-0.5 * ((x - mu) / sd) ** 2) \
            / (sd * math.sqrt(2 * math.pi))

    lo = math.log(max(K, 1e-12))
    value, _ = quad(integrand, lo, mu + 12 * sd, epsabs=1e-12, limit=200)
    return math.exp(-r * tau) * value


class TestBsCall:
    def test_terminal_intrinsic(self):
        assert bs_call(1.2, 0.85, 0.0, 0.5, 0.01) == pytest.approx(0.35)

    def test_zero_strike(self):
        assert bs_call(1.3, 0.0, 2.0, 0.5, 0.01) == pytest.approx(1.3)

    def test_zero_spot(self):
        assert bs_call(0.0, 1.0, 2.0, 0.5, 0.01) == 0.0

    def test_atm_forward_identity(self):
        K, tau, sigma, r = 0.85, 2.0, 0.5, 0.01
        Kd = K * math.exp(-r * tau)
        assert bs_call(Kd, K, tau, sigma, r) == pytest.approx(
            Kd * (2 * norm_cdf(0.5 * sigma * math.sqrt(tau)) - 1.0),
            abs=1e-14)
        assert atm_forward_call(Kd, tau, sigma) == pytest.approx(
            bs_call(Kd, K, tau, sigma, r), abs=1e-14)

    @given(s=st.floats(0.2, 3.0), K=st.floats(0.2, 3.0),
           tau=st.floats(0.1, 3.0), sigma=st.floats(0.1, 1.0),
           r=st.floats(0.0, 0.08))
    @settings(max_examples=25, deadline=None)
    def test_against_quadrature_oracle(self, s, K, tau, sigma, r):
        assert float(bs_call(s, K, tau, sigma, r)) == pytest.approx(
            lognormal_call_oracle(s, K, tau, sigma, r), abs=5e-10)

    @given(s=st.floats(0.1, 3.0), K=st.floats(0.1, 3.0),
           tau=st.floats(0.0, 3.0), sigma=st.floats(0.05, 1.2),
           r=st.floats(0.0, 0.1))
    @settings(max_examples=60)
    def test_put_call_parity(self, s, K, tau, sigma, r):
        c = float(bs_call(s, K, tau, sigma, r))
        p = float(bs_put(s, K, tau, sigma, r))
        assert c - p == pytest.approx(s - K * math.exp(-r * tau), abs=1e-12)

    def test_convex_in_spot(self):
        s = np.linspace(0.01, 4.0, 400)
        c = bs_call(s, 1.0, 1.5, 0.4, 0.02)
        assert np.all(np.diff(c, 2) >= -1e-9)

    def test_discounted_value_on_martingale_ray_nonincreasing(self):
        # t -> D_t * bs_call(K, t, T, s / D_t) falls as maturity nears
        K, T, sigma, r, sd = 1.0, 2.0, 0.5, 0.03, 1.1
        ts = np.linspace(0.0, T, 41)
        vals = [math.exp(-r * t) * float(bs_call(sd * math.exp(r * t), K,
                                                 T - t, sigma, r))
                for t in ts]
        assert np.all(np.diff(vals) <= 1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            bs_call(-1.0, 1.0, 1.0, 0.2)
        with pytest.raises(DomainError):
            bs_call(1.0, 1.0, -1.0, 0.2)
        with pytest.raises(DomainError):
            bs_call(1.0, 1.0, 1.0, 0.0)


class TestExpectedLocalTime:
    def test_zero_horizon(self):
        assert expected_local_time(1.1, 0.9, 0.0, 0.5) == 0.0

    def test_atm_value(self):
        Kd, tau, sigma = 0.83, 1.3, 0.5
        assert expected_local_time(Kd, Kd, tau, sigma) == pytest.approx(
            Kd * (2 * norm_cdf(0.5 * sigma * math.sqrt(tau)) - 1.0))

    def test_tanaka_monte_carlo(self):
        # E[L_T - L_t] equals the expected gain of the discounted call over
        # intrinsic; simulate the discounted price exactly
        sd0, Kd, tau, sigma = 1.2, 0.83, 1.25, 0.5
        rng = np.random.default_rng(11)
        z = rng.standard_normal(1_000_000)
        sdT = sd0 * np.exp(sigma * math.sqrt(tau) * z - 0.5 * sigma**2 * tau)
        sample = np.maximum(sdT - Kd, 0.0)
        se = sample.std(ddof=1) / math.sqrt(len(sample))
        target = sample.mean() - max(sd0 - Kd, 0.0)
        assert expected_local_time(sd0, Kd, tau, sigma) == pytest.approx(
            target, abs=3 * se)

    @given(sd=st.floats(0.2, 3.0), Kd=st.floats(0.2, 3.0),
           tau=st.floats(0.0, 3.0))
    @settings(max_examples=50)
    def test_nonnegative(self, sd, Kd, tau):
        assert expected_local_time(sd, Kd, tau, 0.4) >= 0.0


class TestRhoAndZ:
    def test_rho_vanishes_at_maturity(self, fig3, fig3_pos):
        assert rho(fig3, fig3.T, fig3_pos.Kd(fig3)) == 0.0

    def test_rho_theta_zero_matches_atm_local_time(self):
        m = MarketParams.from_theta(s0=1.2, theta=0.0, r=0.01, sigma=0.5,
                                    T=2.0, p=0.75)
        Kd = 0.83
        for t in (0.0, 0.7, 1.9):
            assert rho(m, t, Kd) == pytest.approx(
                expected_local_time(Kd, Kd, m.T - t, m.sigma))

    def test_rho_positive_and_decreasing(self, fig3, fig3_pos):
        ts = np.linspace(0.0, fig3.T - 1e-9, 101)
        vals = rho(fig3, ts, fig3_pos.Kd(fig3))
        assert np.all(vals[:-1] > 0)
        assert np.all(np.diff(vals) < 0)

    def test_z_terminal_value(self, fig3, fig3_pos):
        Kd = fig3_pos.Kd(fig3)
        assert z(fig3, fig3.T, 3.1, Kd) == pytest.approx(
            -fig3.alpha * fig3.phi_on_strike_line(fig3.T, Kd))

    def test_z_alpha_zero_is_lambda_rho(self, fig3, fig3_pos):
        Kd = fig3_pos.Kd(fig3)
        ts = np.linspace(0.0, fig3.T, 31)
        vals = z(fig3, ts, 2.0, Kd, alpha=0.0)
        assert np.allclose(vals, 2.0 * rho(fig3, ts, Kd))
        assert np.all(np.diff(vals) < 0)
        assert np.all(vals[:-1] > 0)

    def test_z_single_sign_change(self, fig3, fig3_pos):
        ts = np.linspace(0.0, fig3.T, 401)
        vals = z(fig3, ts, 3.1, fig3_pos.Kd(fig3))
        assert vals[0] > 0 > vals[-1]
        assert np.sum(np.diff(np.sign(vals)) != 0) == 1

    @given(theta=st.floats(0.005, 0.35), sigma=st.floats(0.2, 1.0),
           p=st.floats(0.3, 0.95), lam=st.floats(0.0, 6.0),
           alpha=st.floats(0.0, 1.0))
    @settings(max_examples=40, deadline=None)
    def test_z_decreasing_where_positive_in_regime(self, theta, sigma, p,
                                                   lam, alpha):
        # the solver only probes z above nonnegative floors; there the
        # regime flag guarantees strict decrease (below zero the
        # constraint-level term -alpha*phi may drift either way)
        m = MarketParams.from_theta(s0=1.2, theta=theta, r=0.01, sigma=sigma,
                                    T=2.0, p=p, alpha=alpha)
        if not m.z_decreasing:
            return
        ts = np.linspace(0.0, m.T, 201)
        vals = z(m, ts, lam, 0.83, alpha=alpha)
        relevant = np.nonzero(vals > 0)[0]
        if len(relevant) > 1:
            assert np.all(np.diff(vals[relevant]) < 0)
        # a positive stretch is always an initial interval
        assert np.array_equal(relevant, np.arange(len(relevant)))
