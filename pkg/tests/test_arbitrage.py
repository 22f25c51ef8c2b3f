import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intrinsicopt import (CallCurve, DomainError, MarketParams, bs_call,
                          bs_curve, call_admissibility, check_consistency,
                          construct_arbitrage, critical_strikes)
from intrinsicopt.arbitrage import Violation
from intrinsicopt.payoffs import convex_minorant
from intrinsicopt.pricing import atm_forward_call


def fig_market(**kw):
    base = dict(s0=1.2, theta=0.05, r=0.01, sigma=0.5, T=2.0, p=0.75,
                w0=0.3, alpha=0.2)
    base.update(kw)
    return MarketParams.from_theta(**base)


STRIKES = np.array([0.0, 0.4, 0.7, 0.95, 1.2, 1.5, 1.9, 2.4, 3.0])


class TestCheckConsistency:
    def test_model_curve_is_clean(self):
        m = fig_market()
        report = check_consistency(bs_curve(m, STRIKES),
                                   dT=m.discount(m.T))
        assert report.clean
        assert report.not_checkable == ()

    @given(theta=st.floats(-0.2, 0.3), sigma=st.floats(0.15, 0.9),
           r=st.floats(0.0, 0.06), T=st.floats(0.2, 4.0))
    @settings(max_examples=40, deadline=None)
    def test_no_false_positives_on_model_curves(self, theta, sigma, r, T):
        m = fig_market(theta=theta, sigma=sigma, r=r, T=T)
        report = check_consistency(bs_curve(m, STRIKES),
                                   dT=m.discount(m.T), tol=1e-11)
        assert report.clean

    def test_convexity_bump_detected(self):
        m = fig_market()
        curve = bs_curve(m, STRIKES)
        prices = curve.prices.copy()
        k1, k2, k3 = STRIKES[3], STRIKES[4], STRIKES[5]
        lam = (k3 - k2) / (k3 - k1)
        prices[4] = lam * prices[3] + (1 - lam) * prices[5] + 0.01
        bad = CallCurve.from_arrays(STRIKES, prices, m.s0, m.T)
        report = check_consistency(bad, dT=m.discount(m.T))
        hits = [v for v in report.violations if v.kind == "convexity"]
        assert any(v.strikes == (k1, k2, k3) for v in hits)

    def test_negative_quote_detected(self):
        m = fig_market()
        prices = bs_curve(m, STRIKES).prices.copy()
        prices[-1] = -0.004
        report = check_consistency(
            CallCurve.from_arrays(STRIKES, prices, m.s0, m.T),
            dT=m.discount(m.T))
        assert any(v.kind == "nonnegativity" for v in report.violations)

    def test_not_checkable_without_zero_strike(self):
        m = fig_market()
        report = check_consistency(bs_curve(m, STRIKES[1:]),
                                   dT=m.discount(m.T))
        assert set(report.not_checkable) == {"spot_anchor", "slope"}


class TestConstructArbitrage:
    def certify(self, curve, kind, dT):
        report = check_consistency(curve, dT=dT)
        violation = next(v for v in report.violations if v.kind == kind)
        port = construct_arbitrage(curve, violation, dT=dT)
        assert port.epsilon > 0
        assert port.wealth_floor >= -1e-12
        return port

    def test_butterfly_certificate(self):
        m = fig_market()
        prices = bs_curve(m, STRIKES).prices.copy()
        k1, k2, k3 = STRIKES[3], STRIKES[4], STRIKES[5]
        lam = (k3 - k2) / (k3 - k1)
        bump = 0.013
        prices[4] = lam * prices[3] + (1 - lam) * prices[5] + bump
        curve = CallCurve.from_arrays(STRIKES, prices, m.s0, m.T)
        port = self.certify(curve, "convexity", m.discount(m.T))
        assert port.epsilon == pytest.approx(bump, abs=1e-12)
        # the minorant of the butterfly vanishes identically
        g_star = convex_minorant(port.payoff())
        xs = np.linspace(0.0, 5.0, 200)
        assert np.allclose(g_star(xs), 0.0, atol=1e-12)

    def test_monotonicity_spread(self):
        m = fig_market()
        prices = bs_curve(m, STRIKES).prices.copy()
        prices[5] = prices[4] + 0.006
        curve = CallCurve.from_arrays(STRIKES, prices, m.s0, m.T)
        port = self.certify(curve, "monotonicity", m.discount(m.T))
        xs = np.linspace(0.0, 5.0, 200)
        assert np.allclose(convex_minorant(port.payoff())(xs), 0.0,
                           atol=1e-12)

    def test_slope_portfolio_floor(self):
        m = fig_market()
        prices = bs_curve(m, STRIKES).prices.copy()
        dT = m.discount(m.T)
        prices[1] = prices[0] - dT * STRIKES[1] - 0.004
        curve = CallCurve.from_arrays(STRIKES, prices, m.s0, m.T)
        port = self.certify(curve, "slope", dT)
        # short asset, long call: minorant floor is -K
        assert convex_minorant(port.payoff()).minimum() == pytest.approx(
            -STRIKES[1])

    def test_anchor_portfolio_both_sides(self):
        m = fig_market()
        dT = m.discount(m.T)
        for sign in (+1, -1):
            prices = bs_curve(m, STRIKES).prices.copy()
            prices[0] = m.s0 + sign * 0.01
            curve = CallCurve.from_arrays(STRIKES, prices, m.s0, m.T)
            port = self.certify(curve, "spot_anchor", dT)
            assert port.epsilon == pytest.approx(0.01, abs=1e-12)

    def test_scaling_preserves_certificate(self):
        m = fig_market()
        prices = bs_curve(m, STRIKES).prices.copy()
        prices[-1] = -0.002
        curve = CallCurve.from_arrays(STRIKES, prices, m.s0, m.T)
        port = self.certify(curve, "nonnegativity", m.discount(m.T))
        doubled = port.scaled(2.0)
        assert doubled.epsilon == pytest.approx(2 * port.epsilon)
        assert doubled.wealth_floor == pytest.approx(2 * port.wealth_floor)
        with pytest.raises(DomainError):
            port.scaled(-1.0)


class TestAdmissibility:
    def test_long_fair_price_threshold(self):
        m = fig_market()
        k_plus, _ = critical_strikes(m)
        for K, expect in ((0.9 * k_plus, True), (1.1 * k_plus, False)):
            fair = float(bs_call(m.s0, K, m.T, m.sigma, m.r))
            decision = call_admissibility(m, "long", K, fair)
            assert decision.passes is expect

    def test_long_slack_value(self):
        m = fig_market()
        K = 1.1
        fair = float(bs_call(m.s0, K, m.T, m.sigma, m.r))
        decision = call_admissibility(m, "long", K, fair)
        expected = m.w0 + m.alpha - atm_forward_call(
            m.discounted_strike(K), m.T, m.sigma)
        assert decision.slack == pytest.approx(expected, abs=1e-12)

    def test_short_boundary(self):
        m = fig_market()
        K = (m.w0 + m.alpha) / m.discount(m.T)
        fair = float(bs_call(m.s0, K, m.T, m.sigma, m.r))
        decision = call_admissibility(m, "short", K, fair)
        assert decision.slack == pytest.approx(0.0, abs=1e-12)
        assert decision.passes

    def test_large_strike_long_fails(self):
        m = fig_market()
        fair = float(bs_call(m.s0, 40.0, m.T, m.sigma, m.r))
        assert not call_admissibility(m, "long", 40.0, fair).passes

    def test_mispricing_shifts_slack(self):
        m = fig_market()
        K = 1.0
        fair = float(bs_call(m.s0, K, m.T, m.sigma, m.r))
        cheap = call_admissibility(m, "long", K, fair - 0.05)
        assert cheap.slack == pytest.approx(
            call_admissibility(m, "long", K, fair).slack + 0.05)


class TestCriticalStrikes:
    def test_k_minus_formula(self):
        m = fig_market(r=0.01, T=2.0)
        _, k_minus = critical_strikes(m, w0=0.3, alpha=0.2)
        assert k_minus == pytest.approx(0.5 * math.exp(0.02))

    def test_high_vol_limit(self):
        m = fig_market(sigma=60.0)
        k_plus, k_minus = critical_strikes(m)
        assert k_plus == pytest.approx(k_minus, rel=1e-6)

    def test_consistency_with_admissibility(self):
        m = fig_market()
        k_plus, _ = critical_strikes(m)
        for K in np.linspace(0.3, 2.5, 23):
            fair = float(bs_call(m.s0, K, m.T, m.sigma, m.r))
            assert call_admissibility(m, "long", K, fair).passes == \
                (K <= k_plus)

    def test_domain(self):
        m = fig_market(w0=0.0, alpha=0.0)
        with pytest.raises(DomainError):
            critical_strikes(m)
