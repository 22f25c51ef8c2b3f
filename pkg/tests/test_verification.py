import math

import numpy as np
import pytest

from intrinsicopt import (CallPosition, Measure, OneTouchSpec, expected_sup_J,
                          varphi_Q, verify_maxplus)
from intrinsicopt.callmax import make_zeta_star_evaluator, solve_M
from intrinsicopt.market import _philox
from intrinsicopt.onetouch import semi_static_functional
from intrinsicopt.passage import LineBoundary, gamma1, gamma2, hit_cdf
from intrinsicopt.pricing import z as z_index
from intrinsicopt.verification import supermartingale_drift


class TestVerifyMaxplus:
    def test_martingale_tower_property(self, fig3):
        # score nothing, terminal = driver level: X_t must be the
        # conditional expectation of the terminal value
        level = fig3.level_of(0.2)   # a line the driver rarely touches

        def terminal(levels):
            return levels

        beta = fig3.line_slope(Measure.QBAR)

        def x_eval(t, levels):
            # E[R_T | R_t] for the driver with slope -beta
            return levels - beta * (fig3.T - t)

        report = verify_maxplus(
            fig3, level, score=lambda u: -np.inf * np.ones_like(u),
            x_eval=x_eval, times=[0.0, 1.0], measure=Measure.QBAR,
            n_paths=40_000, n_steps=128, seed=3, terminal_score=terminal)
        assert report.within(3.0)

    def test_call_representation_and_negative_control(self, fig3, fig3_pos):
        Kd = fig3_pos.Kd(fig3)
        x_eval = make_zeta_star_evaluator(fig3, fig3_pos)
        good = verify_maxplus(
            fig3, fig3.level_of(Kd),
            score=lambda u: z_index(fig3, u, fig3_pos.lam, Kd),
            x_eval=x_eval, times=[0.0, 0.5], measure=Measure.QBAR,
            n_paths=40_000, n_steps=512, seed=44)
        assert good.within(3.0)
        bad = verify_maxplus(
            fig3, fig3.level_of(Kd),
            score=lambda u: z_index(fig3, u, fig3_pos.lam, Kd) + 0.1,
            x_eval=x_eval, times=[0.0, 0.5], measure=Measure.QBAR,
            n_paths=40_000, n_steps=512, seed=44)
        assert bad.max_n_sigma > 5.0

    def test_supermartingale_drift_negative_control(self, fig3):
        # a strictly increasing functional must be rejected
        drifts = supermartingale_drift(
            fig3, lambda t, levels, hit: np.full_like(levels, t),
            Measure.QBAR, [0.0, 1.0, 1.9], n_paths=2_000, n_steps=64, seed=1)
        assert any(inc > 3 * se for _, _, inc, se in drifts)


class TestMeasureChangeIdentity:
    def test_two_stage_value_same_under_q_and_qbar(self, fig7, fig7_spec):
        """The weighted tilted-measure functional equals its risk-neutral
        counterpart at time zero (density-process start at one)."""
        got = semi_static_functional(fig7, fig7_spec, 0.0)

        # independent risk-neutral evaluation: same two-stage structure,
        # slope sigma/2, scores varphi_Q^* unweighted, terminal unweighted
        m, spec = fig7, fig7_spec
        beta = m.line_slope(Measure.Q)
        b1 = LineBoundary(x=m.x0, y=m.level_of(spec.Bd(m)), beta=beta)
        b2 = LineBoundary(x=m.level_of(spec.Bd(m)),
                          y=m.level_of(spec.Kd(m)), beta=beta)
        from scipy.integrate import quad
        from scipy.optimize import brentq

        def g(u):
            return max(varphi_Q(m, spec, u), 0.0)

        u_cut = brentq(lambda u: varphi_Q(m, spec, u), 0.0, m.T)

        def inner(s):
            if u_cut <= s:
                return 0.0
            val, _ = quad(lambda v: gamma1(v, b2) * g(s + v), 0.0,
                          u_cut - s, epsabs=1e-10, limit=200)
            return val

        hit_part, _ = quad(lambda s: gamma1(s, b1) * inner(s), 0.0, u_cut,
                           epsabs=1e-9, limit=200)

        def h(v):
            sd = math.exp(m.sigma * (v - beta * m.T))
            return max(-spec.alpha_of(m)
                       + max(sd - spec.Kd(m), 0.0) / (spec.B - spec.K), 0.0)

        term_part, _ = quad(lambda v: h(v) * gamma2(v, m.T, b1),
                            m.x0 + beta * m.T - 14 * math.sqrt(m.T),
                            b1.y + beta * m.T, epsabs=1e-10, limit=300)
        assert got == pytest.approx(hit_part + term_part, abs=5e-7)


class TestAdditiveSplit:
    def test_disjoint_supports_add(self, fig7, fig7_spec):
        """Terminal (never-hit) and strike-line (post-hit) score families
        live on disjoint events, so the supremum of the sum is the sum of
        the suprema, path by path."""
        m, spec = fig7, fig7_spec
        beta = m.line_slope(Measure.Q)
        n_paths, n_steps = 4_000, 512
        dt = m.T / n_steps
        grid = dt * np.arange(n_steps + 1)
        yB = m.level_of(spec.Bd(m))
        yK = m.level_of(spec.Kd(m))
        lineB, lineK = yB + beta * grid, yK + beta * grid
        rng = _philox(9)
        w = np.full(n_paths, m.x0)
        hitB = np.zeros(n_paths, bool)
        hitK = np.zeros(n_paths, bool)
        sup_z = np.zeros(n_paths)
        dB, dK = w - lineB[0], w - lineK[0]
        for k in range(n_steps):
            w = w + rng.standard_normal(n_paths) * math.sqrt(dt)
            dB2, dK2 = w - lineB[k + 1], w - lineK[k + 1]
            crossB = dB * dB2 <= 0
            crossK = dK * dK2 <= 0
            fresh = hitB & crossK & ~hitK
            sup_z[fresh] = max(varphi_Q(m, spec, grid[k] + 0.5 * dt), 0.0)
            hitK |= hitB & crossK
            hitB |= crossB
            dB, dK = dB2, dK2
        sd = np.exp(m.sigma * (w - beta * m.T))
        sup_y = np.where(~hitB, np.maximum(
            -spec.alpha_of(m) + np.maximum(sd - spec.Kd(m), 0.0)
            / (spec.B - spec.K), 0.0), 0.0)
        # disjoint supports: never both active
        assert not np.any((sup_y > 0) & (sup_z > 0))
        combined = np.maximum(sup_y, sup_z)
        assert np.allclose(combined, sup_y + sup_z)
