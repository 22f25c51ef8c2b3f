import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intrinsicopt import DomainError, MarketParams, Measure, simulate_paths
from intrinsicopt.market import discounted_prices

positive = st.floats(0.05, 3.0)


def make_market(sigma=0.5, r=0.01, theta=0.05, p=0.75, T=2.0):
    return MarketParams.from_theta(s0=1.2, theta=theta, r=r, sigma=sigma,
                                   T=T, p=p, w0=0.1, alpha=0.1)


class TestParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            MarketParams(s0=1.0, mu=0.05, r=0.01, sigma=-0.1, T=1.0, p=0.5)
        with pytest.raises(DomainError):
            MarketParams(s0=1.0, mu=0.05, r=0.01, sigma=0.2, T=1.0, p=1.2)
        with pytest.raises(DomainError):
            MarketParams(s0=-1.0, mu=0.05, r=0.01, sigma=0.2, T=1.0, p=0.5)

    def test_theta_and_regime_flag(self):
        m = make_market(theta=0.05, sigma=0.5, p=0.75)
        assert m.theta == pytest.approx(0.05)
        assert m.z_decreasing
        # p*sigma <= theta breaks the hypothesis
        assert not make_market(theta=0.4, sigma=0.5, p=0.75).z_decreasing
        assert not make_market(theta=-0.05).z_decreasing


class TestDiscount:
    def test_at_zero(self):
        assert make_market().discount(0.0) == 1.0

    def test_zero_rate(self):
        m = make_market(r=0.0)
        assert m.discount(1.7) == 1.0

    def test_fig3_value(self):
        assert make_market(r=0.01).discount(2.0) == pytest.approx(
            math.exp(-0.02), abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            make_market().discount(-0.1)
        with pytest.raises(DomainError):
            make_market(T=2.0).discount(2.5)

    @given(r=st.floats(0.0, 0.2))
    def test_nonincreasing(self, r):
        m = make_market(r=r)
        ts = np.linspace(0.0, m.T, 50)
        d = m.discount(ts)
        assert d[0] == 1.0
        assert np.all(np.diff(d) <= 0)


class TestSpdMoments:
    def test_zeroth(self):
        assert make_market().spd_moment(0.0) == 1.0

    def test_first_is_discount(self):
        m = make_market()
        assert m.spd_moment(1.0) == pytest.approx(m.discount(m.T), rel=1e-14)

    def test_monte_carlo_power_moment(self):
        # lognormal H_T: draw exactly and compare the utility exponent moment
        m = make_market()
        q = 1.0 - 1.0 / m.p
        rng = np.random.default_rng(7)
        b = rng.standard_normal(1_000_000) * math.sqrt(m.T)
        h = np.exp(-m.theta * b - (0.5 * m.theta**2 + m.r) * m.T)
        sample = h ** q
        se = sample.std(ddof=1) / math.sqrt(len(sample))
        assert abs(sample.mean() - m.spd_moment(q)) < 3 * se

    def test_convex_in_q(self):
        m = make_market()
        qs = np.linspace(-2.0, 2.0, 41)
        vals = np.array([m.spd_moment(q) for q in qs])
        assert np.all(np.diff(vals, 2) >= -1e-12)

    def test_cp_theta_zero(self):
        # deterministic kernel: c_p = exp(-r T (p-1))
        m = make_market(theta=0.0, r=0.03, p=0.6)
        assert m.cp_constant() == pytest.approx(
            math.exp(-0.03 * m.T * (0.6 - 1.0)), rel=1e-13)
        assert make_market(theta=0.0, r=0.0).cp_constant() == 1.0


class TestPhiOnStrikeLine:
    def test_theta_zero_is_one(self):
        m = make_market(theta=0.0)
        for t in (0.0, 0.4, 2.0):
            assert m.phi_on_strike_line(t, 0.8) == pytest.approx(1.0)

    def test_initial_value(self):
        m = make_market()
        Kd = 0.8
        expected = (m.s0 / Kd) ** (m.theta / (m.sigma * m.p))
        assert m.phi_on_strike_line(0.0, Kd) == pytest.approx(expected)

    @given(theta=st.floats(-0.3, 0.3), sigma=st.floats(0.2, 1.0),
           p=st.floats(0.2, 0.9))
    @settings(max_examples=40)
    def test_log_linear_with_stated_slope(self, theta, sigma, p):
        m = make_market(theta=theta, sigma=sigma, p=p)
        ts = np.linspace(0.0, m.T, 33)
        logs = np.log(m.phi_on_strike_line(ts, 0.8))
        slopes = np.diff(logs) / np.diff(ts)
        expected = theta * (theta - sigma * p) / (2 * p * p)
        assert np.allclose(slopes, expected, atol=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            make_market().phi_on_strike_line(0.5, -1.0)


class TestSimulatePaths:
    def test_deterministic_for_seed(self):
        m = make_market()
        g1, p1 = simulate_paths(m, Measure.Q, 64, 16, seed=9)
        g2, p2 = simulate_paths(m, "Q", 64, 16, seed=9)
        assert np.array_equal(p1, p2) and np.array_equal(g1, g2)
        _, p3 = simulate_paths(m, "Q", 64, 16, seed=10)
        assert not np.array_equal(p1, p3)

    def test_martingale_property_under_q(self):
        m = make_market()
        grid, paths = simulate_paths(m, Measure.Q, 100_000, 8, seed=3)
        sd = discounted_prices(m, Measure.Q, grid, paths)
        terminal = sd[:, -1]
        se = terminal.std(ddof=1) / math.sqrt(len(terminal))
        assert abs(terminal.mean() - m.s0) < 4 * se

    def test_p_measure_log_mean(self):
        m = make_market()
        grid, paths = simulate_paths(m, Measure.P, 100_000, 8, seed=4)
        sd = discounted_prices(m, Measure.P, grid, paths)
        logs = np.log(sd[:, -1]) + m.r * m.T
        target = math.log(m.s0) + (m.mu - 0.5 * m.sigma**2) * m.T
        se = logs.std(ddof=1) / math.sqrt(len(logs))
        assert abs(logs.mean() - target) < 3 * se

    def test_measure_slopes(self):
        m = make_market()
        assert m.line_slope(Measure.Q) == pytest.approx(m.sigma / 2)
        assert m.line_slope(Measure.QBAR) == pytest.approx(
            m.sigma / 2 - m.theta / m.p)
        assert m.line_slope(Measure.P) == pytest.approx(m.sigma / 2 - m.theta)

    def test_bad_args(self):
        with pytest.raises(DomainError):
            simulate_paths(make_market(), "Q", 0, 8, seed=1)
        with pytest.raises(DomainError):
            simulate_paths(make_market(), "nope", 8, 8, seed=1)
