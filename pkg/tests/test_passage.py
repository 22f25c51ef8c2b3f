import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from intrinsicopt import (AccuracyError, DomainError, LineBoundary, gamma0,
                          gamma1, gamma1_by_inversion, gamma2, hit_cdf,
                          laplace_invert)
from intrinsicopt.errors import DegenerateBoundaryError
from intrinsicopt.passage import (first_passage_mc, gamma1_laplace,
                                  gamma2_truncated_moments, hit_mass,
                                  integrate_gamma1)


@st.composite
def boundaries(draw):
    x = draw(st.floats(-1.5, 1.5))
    gap = draw(st.floats(0.1, 2.0)) * (1 if draw(st.booleans()) else -1)
    beta = draw(st.floats(-1.0, 1.0))
    return LineBoundary(x=x, y=x + gap, beta=beta)


class TestGamma0:
    def test_mode_value(self):
        assert gamma0(0.3, 1.0, 0.3) == pytest.approx(1 / math.sqrt(2 * math.pi))

    def test_normalisation(self):
        val, _ = quad(lambda v: gamma0(v, 0.7, 0.1), -12, 12, epsabs=1e-12)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_symmetry(self):
        assert gamma0(1.1 + 0.4, 0.5, 1.1) == gamma0(1.1 - 0.4, 0.5, 1.1)

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma0(0.0, 0.0, 0.0)


class TestGamma1:
    def test_degenerate_boundary(self):
        with pytest.raises(DegenerateBoundaryError):
            LineBoundary(x=1.0, y=1.0, beta=0.3)

    def test_flat_boundary_recurrent(self):
        # mass accumulates to one, with the heavy u^{-3/2} tail matching
        # the closed-form CDF en route
        b = LineBoundary(x=0.0, y=1.0, beta=0.0)
        assert hit_mass(b) == 1.0
        mass = integrate_gamma1(lambda u: 1.0, b, 0.0, 200.0, epsabs=1e-11)
        assert mass == pytest.approx(float(hit_cdf(200.0, b)), abs=1e-8)
        assert float(hit_cdf(1e8, b)) == pytest.approx(1.0, abs=1e-3)

    def test_defective_mass(self):
        b = LineBoundary(x=0.0, y=1.0, beta=0.5)   # boundary runs away
        assert hit_mass(b) == pytest.approx(math.exp(-1.0))
        mass = integrate_gamma1(lambda u: 1.0, b, 0.0, 4000.0, epsabs=1e-10)
        assert mass == pytest.approx(math.exp(-1.0), abs=1e-6)

    @given(boundaries())
    @settings(max_examples=30, deadline=None)
    def test_nonnegative_and_cdf_consistent(self, b):
        us = np.linspace(1e-3, 3.0, 50)
        assert np.all(gamma1(us, b) >= 0)
        integral = integrate_gamma1(lambda u: 1.0, b, 0.0, 2.0, epsabs=1e-11)
        assert integral == pytest.approx(float(hit_cdf(2.0, b)), abs=1e-8)

    def test_domain(self):
        b = LineBoundary(x=0.0, y=1.0, beta=0.0)
        with pytest.raises(DomainError):
            gamma1(0.0, b)


class TestLaplaceRoutes:
    def test_constant(self):
        assert laplace_invert(lambda s: 1.0 / s, 1.0) == pytest.approx(
            1.0, abs=1e-8)

    def test_ramp(self):
        assert laplace_invert(lambda s: 1.0 / s**2, 3.0) == pytest.approx(
            3.0, abs=1e-7)

    def test_levy_density(self):
        # known transform pair exp(-sqrt(2 s)) <-> first passage to level 1
        for t in (0.3, 1.0, 2.5):
            target = math.exp(-1.0 / (2 * t)) / math.sqrt(2 * math.pi * t**3)
            assert laplace_invert(lambda s: np.exp(-np.sqrt(2.0 * s)), t) == \
                pytest.approx(target, abs=1e-8)

    def test_accuracy_error_carries_residual(self):
        rng = np.random.default_rng(0)
        with pytest.raises(AccuracyError) as err:
            # white-noise "transform" cannot be accelerated
            laplace_invert(lambda s: rng.standard_normal(), 1.0)
        assert err.value.residual is not None and err.value.residual > 0

    @given(boundaries())
    @settings(max_examples=12, deadline=None)
    def test_inversion_matches_closed_form(self, b):
        us = np.linspace(0.05, 2.0, 12)
        closed = gamma1(us, b)
        inverted = gamma1_by_inversion(us, b)
        assert np.max(np.abs(closed - inverted)) < 1e-6

    def test_transform_value_at_zero_is_mass(self):
        b = LineBoundary(x=0.4, y=-0.6, beta=0.2)
        assert gamma1_laplace(b)(1e-14) == pytest.approx(hit_mass(b), abs=1e-6)


class TestGamma2:
    def test_short_time_is_free_density(self):
        b = LineBoundary(x=0.0, y=1.0, beta=0.0)
        assert gamma2(0.05, 0.01, b) == pytest.approx(
            gamma0(0.05, 0.01, 0.0), rel=1e-12)

    def test_zero_beyond_boundary(self):
        b = LineBoundary(x=0.0, y=1.0, beta=-0.3)
        t = 0.8
        edge = b.y + b.beta * t
        assert gamma2(edge + 0.2, t, b) == 0.0
        assert gamma2(edge, t, b) == 0.0

    @given(boundaries(), st.floats(0.2, 2.5))
    @settings(max_examples=25, deadline=None)
    def test_survival_mass_complements_hit_cdf(self, b, t):
        edge = b.y + b.beta * t
        far = b.x + b.side() * 14 * math.sqrt(t)
        lo, hi = min(edge, far), max(edge, far)
        mass, _ = quad(lambda v: gamma2(v, t, b), lo, hi, epsabs=1e-11,
                       limit=300)
        assert mass == pytest.approx(1.0 - float(hit_cdf(t, b)), abs=1e-8)

    @given(boundaries(), st.floats(0.3, 2.0))
    @settings(max_examples=15, deadline=None)
    def test_chapman_kolmogorov(self, b, t):
        v = b.x + 0.35 * (b.x - b.y)          # a point on the starting side
        conv, _ = quad(lambda u: gamma1(u, b) * gamma0(v, t - u,
                                                       b.y + b.beta * u),
                       0.0, t, epsabs=1e-11, limit=300)
        assert gamma0(v, t, b.x) == pytest.approx(gamma2(v, t, b) + conv,
                                                  abs=1e-7)

    def test_truncated_moments(self):
        b = LineBoundary(x=0.2, y=1.1, beta=0.15)
        t, lo, hi, expo = 0.9, -0.8, 0.9, 0.7
        m_exp, _ = quad(lambda v: math.exp(expo * v) * gamma2(v, t, b),
                        lo, hi, epsabs=1e-12)
        m0, _ = quad(lambda v: gamma2(v, t, b), lo, hi, epsabs=1e-12)
        got_exp, got_mass = gamma2_truncated_moments(b, t, lo, hi, expo)
        assert got_exp == pytest.approx(m_exp, abs=1e-10)
        assert got_mass == pytest.approx(m0, abs=1e-10)


class TestMonteCarloRoute:
    def test_deterministic(self):
        b = LineBoundary(x=0.0, y=0.8, beta=-0.1)
        out1 = first_passage_mc(b, 2.0, 2000, 64, seed=5)
        out2 = first_passage_mc(b, 2.0, 2000, 64, seed=5)
        assert np.array_equal(out1[1], out2[1])
        assert np.array_equal(out1[2], out2[2])

    def test_hit_probability_matches_cdf(self):
        b = LineBoundary(x=0.0, y=0.9, beta=0.2)
        n = 40_000
        grid, hit_step, _ = first_passage_mc(b, 2.0, n, 512, seed=8)
        counts = np.bincount(hit_step[hit_step >= 0], minlength=512)
        emp = np.cumsum(counts) / n
        theo = hit_cdf(grid[1:], b)
        band = math.sqrt(math.log(2 / 0.01) / (2 * n))
        assert np.max(np.abs(emp - theo)) < band

    def test_survivor_terminal_matches_gamma2(self):
        # survival-conditioned terminal law vs gamma2, KS-style on the CDF
        b = LineBoundary(x=0.0, y=1.1, beta=-0.15)
        n = 40_000
        t = 1.5
        _, hit_step, terminal = first_passage_mc(b, t, n, 512, seed=9)
        surv = terminal[hit_step < 0]
        surv_mass = 1.0 - float(hit_cdf(t, b))
        qs = np.sort(surv)
        theo = np.array([quad(lambda v: gamma2(v, t, b), -20.0, q,
                              epsabs=1e-10, limit=200)[0] / surv_mass
                         for q in qs[:: max(1, len(qs) // 64)]])
        emp = (np.arange(len(qs)) / len(qs))[:: max(1, len(qs) // 64)]
        band = math.sqrt(math.log(2 / 0.01) / (2 * len(surv)))
        assert np.max(np.abs(emp - theo)) < band + 0.01

    def test_measure_mapped_hit_probabilities(self, fig3, fig3_pos):
        # the slope mapping {Q, Qbar, P} reproduces simulated hitting rates
        from intrinsicopt import Measure
        Kd = fig3_pos.Kd(fig3)
        for measure in (Measure.Q, Measure.QBAR, Measure.P):
            b = LineBoundary(x=fig3.x0, y=fig3.level_of(Kd),
                             beta=fig3.line_slope(measure))
            n = 30_000
            _, hit_step, _ = first_passage_mc(b, fig3.T, n, 256, seed=13)
            p_hat = np.mean(hit_step >= 0)
            p = float(hit_cdf(fig3.T, b))
            se = math.sqrt(p * (1 - p) / n)
            assert abs(p_hat - p) < 4 * se
