"""Selling a one-touch option under the intrinsic wealth floor.

Compares three stances for a trader who can sell a one-touch (barrier B,
paying at maturity) at a premium over replication cost:

* ``semi_static``  -- sell and hold the classical superhedge package
  (1/(B-K) calls struck at K plus a barrier-triggered forward);
* ``dynamic_only`` -- sell and hedge with the underlying alone;
* ``no_sale``      -- do not sell.

The semi-static case has a two-stage closed-form route: the optimal
terminal wealth scores a deterministic function of time at the first
return of the discounted price to the discounted hedge strike after the
barrier has been hit, plus a terminal contribution on never-hit paths.
The dynamic-only case has no such closed form and runs on the lattice
Snell oracle (a quadrature oracle built on the fact that the constraint
process is a martingale before maturity is kept alongside for
cross-validation).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr

from .callmax import u_pow
from .errors import DomainError, InfeasibleError
from .lattice import LatticeProcessSpec, LatticeSolution, snell_lattice
from .market import MarketParams, Measure
from .passage import (LineBoundary, gamma1, gamma2, gamma2_truncated_moments,
                      hit_cdf, first_passage_mc)
from .pricing import atm_forward_call, bs_put, norm_cdf
from .tables import ResultTable

_GL_X, _GL_W = np.polynomial.legendre.leggauss(96)


class HedgeMode(str, enum.Enum):
    SEMI_STATIC = "semi_static"
    DYNAMIC_ONLY = "dynamic_only"
    NO_SALE = "no_sale"

    @classmethod
    def parse(cls, value) -> "HedgeMode":
        if isinstance(value, HedgeMode):
            return value
        for mode in cls:
            if str(value).lower() == mode.value:
                return mode
        raise DomainError(f"unknown hedge mode {value!r}")

    @property
    def code(self) -> int:
        return {"semi_static": 0, "dynamic_only": 1, "no_sale": 2}[self.value]


@dataclass(frozen=True)
class OneTouchSpec:
    """Short one-touch position descriptor.

    ``premium`` is the amount received above the replication cost of the
    one-touch; ``w0``/``alpha`` default to the market's values.
    """

    B: float
    K: float
    premium: float = 0.0
    w0: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if not (0 < self.K < self.B):
            raise DomainError("need 0 < K < B")
        if self.premium < 0:
            raise DomainError("premium must be >= 0")

    def Bd(self, m: MarketParams) -> float:
        return m.discounted_strike(self.B)

    def Kd(self, m: MarketParams) -> float:
        return m.discounted_strike(self.K)

    def alpha_of(self, m: MarketParams) -> float:
        return m.alpha if self.alpha is None else self.alpha

    def w0_of(self, m: MarketParams) -> float:
        return m.w0 if self.w0 is None else self.w0


# ---------------------------------------------------------------------- #
# static pieces
# ---------------------------------------------------------------------- #

def hobson_payoff(s_T, hit, spec: OneTouchSpec):
    """Terminal value of the superhedge package minus the one-touch:
    (s_T - K)_+/(B-K) on never-hit paths, (K - s_T)_+/(B-K) otherwise.
    Nonnegative everywhere: the superhedge certificate."""
    s = np.asarray(s_T, dtype=float)
    if np.any(s < 0):
        raise DomainError("terminal spot must be >= 0")
    hit_arr = np.asarray(hit, dtype=bool)
    out = np.where(hit_arr, np.maximum(spec.K - s, 0.0),
                   np.maximum(s - spec.K, 0.0)) / (spec.B - spec.K)
    return float(out) if out.ndim == 0 else out


def barrier_boundary(m: MarketParams, spec: OneTouchSpec,
                     measure=Measure.Q) -> LineBoundary:
    """{S^D = B^D} as a line problem for the measure's driver."""
    return LineBoundary(x=m.x0, y=m.level_of(spec.Bd(m)),
                        beta=m.line_slope(measure))


def return_boundary(m: MarketParams, spec: OneTouchSpec,
                    measure=Measure.QBAR) -> LineBoundary:
    """First passage from the barrier line down to the hedge-strike line."""
    return LineBoundary(x=m.level_of(spec.Bd(m)), y=m.level_of(spec.Kd(m)),
                        beta=m.line_slope(measure))


def onetouch_price(m: MarketParams, spec: OneTouchSpec) -> float:
    """Arbitrage-free price E_Q[D_T 1_{hit}] of the one-touch."""
    if m.s0 >= spec.Bd(m):
        warnings.warn("barrier already touched at time 0; price is D_T",
                      RuntimeWarning, stacklevel=2)
        return float(m.discount(m.T))
    return float(m.discount(m.T) * hit_cdf(m.T, barrier_boundary(m, spec)))


def onetouch_price_mc(m: MarketParams, spec: OneTouchSpec, n_paths=100_000,
                      n_steps=4096, seed=3) -> tuple[float, float]:
    """Monte Carlo price with bridge-corrected barrier detection;
    returns (price, standard_error)."""
    _, hit_step, _ = first_passage_mc(barrier_boundary(m, spec), m.T,
                                      n_paths, n_steps, seed)
    ind = (hit_step >= 0).astype(float)
    dT = m.discount(m.T)
    return float(dT * ind.mean()), float(dT * ind.std(ddof=1) / math.sqrt(n_paths))


def varphi_Q(m: MarketParams, spec: OneTouchSpec, u):
    """Score offered at a post-barrier return to the hedge strike, in
    risk-neutral units: ATM put on the discounted price over (B-K), less
    alpha; tends to -alpha as u -> T."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0) or np.any(u_arr > m.T * (1 + 1e-12)):
        raise DomainError("u must lie in [0, T]")
    Kd = spec.Kd(m)
    put_atm = atm_forward_call(Kd, np.maximum(m.T - u_arr, 0.0), m.sigma)
    out = put_atm / (spec.B - spec.K) - spec.alpha_of(m)
    return float(out) if np.isscalar(u) else out


def hobson_optimal_strike(m: MarketParams, B: float) -> float:
    """Strike minimising the cost of the superhedge, i.e. minimising
    bs_call(s0, K)/(B - K) over K in (0, B); golden-section search with
    tolerance 1e-6*B."""
    from .pricing import bs_call

    def cost(K):
        return bs_call(m.s0, K, m.T, m.sigma, m.r) / (B - K)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 1e-6 * B, B * (1.0 - 1e-9)
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = cost(c), cost(d)
    while b - a > 1e-6 * B:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = cost(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = cost(d)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------- #
# the constraint process in risk-neutral units
# ---------------------------------------------------------------------- #

def _hit_prob_flat(levels, b_level, nu, tau):
    """P(drifted driver from `levels` reaches the flat level b within tau);
    vectorised over levels."""
    levels = np.asarray(levels, dtype=float)
    a = b_level - levels
    out = np.ones_like(levels)
    if tau <= 0:
        return np.where(a <= 0, 1.0, 0.0)
    rt = math.sqrt(tau)
    below = a > 0
    ab = np.where(below, a, 1.0)
    val = (ndtr((nu * tau - ab) / rt)
           + np.exp(np.clip(2.0 * nu * ab, -745.0, 50.0))
           * ndtr((-nu * tau - ab) / rt))
    return np.where(below, val, out)


def _barrier_truncated_put_call(m, spec, levels, tau):
    """(up-and-out call, up-and-in put) values on the discounted price from
    driver levels, remaining time tau, under Q.  Vectorised over levels via
    the reflection form of the survival density."""
    Kd, Bd = spec.Kd(m), spec.Bd(m)
    yB = m.level_of(Bd)
    sigma = m.sigma
    nu = -0.5 * sigma                        # Q-drift of the driver
    levels = np.asarray(levels, dtype=float)
    sd = np.exp(sigma * levels)
    below = levels < yB
    if tau <= 0:
        return (np.where(below, np.maximum(sd - Kd, 0.0), 0.0),
                np.where(below, 0.0, np.maximum(Kd - sd, 0.0)))
    r = np.where(below, levels, yB - 1.0)    # placeholder for masked nodes
    rt = math.sqrt(tau)
    upper = yB + 0.5 * sigma * tau           # surviving side in bridge coords
    k_level = m.level_of(Kd) - nu * tau      # strike threshold, bridge coords
    scale = math.exp(sigma * nu * tau)
    tilt = np.exp(-sigma * (yB - r))         # exp(-2 beta (y - x)), beta = sigma/2

    def piece(mean, lo, hi):
        lo = np.minimum(np.maximum(lo, -np.inf), upper)
        hi = np.minimum(hi, upper)
        width_ok = hi > lo
        mass = ndtr((hi - mean) / rt) - ndtr((lo - mean) / rt)
        mexp = np.exp(sigma * mean + 0.5 * sigma * sigma * tau) * (
            ndtr((hi - mean - sigma * tau) / rt)
            - ndtr((lo - mean - sigma * tau) / rt))
        return np.where(width_ok, mexp, 0.0), np.where(width_ok, mass, 0.0)

    lo_arr = np.full_like(r, k_level)
    hi_inf = np.full_like(r, np.inf)
    lo_inf = np.full_like(r, -np.inf)
    e1, m1 = piece(r, lo_arr, hi_inf)
    e2, m2 = piece(2.0 * yB - r, lo_arr, hi_inf)
    uoc = scale * (e1 - tilt * e2) - Kd * (m1 - tilt * m2)
    e3, m3 = piece(r, lo_inf, lo_arr)
    e4, m4 = piece(2.0 * yB - r, lo_inf, lo_arr)
    uop = Kd * (m3 - tilt * m4) - scale * (e3 - tilt * e4)
    put = bs_put(sd, Kd, tau, sigma, r=0.0)
    uoc = np.where(below, np.maximum(uoc, 0.0), 0.0)
    uip = np.where(below, np.maximum(put - np.maximum(uop, 0.0), 0.0), put)
    return uoc, uip


def hatzeta_semi_static(m: MarketParams, spec: OneTouchSpec, t, levels, hit):
    """Q-supermartingale constraint process for the superhedged sale:
    -alpha - intrinsic + conditional package value, at driver levels."""
    tau = m.T - t
    alpha = spec.alpha_of(m)
    Kd = spec.Kd(m)
    scale = 1.0 / (spec.B - spec.K)
    levels = np.asarray(levels, dtype=float)
    sd = np.exp(m.sigma * levels)
    if hit:
        put = bs_put(sd, Kd, tau, m.sigma, r=0.0) if tau > 0 else np.maximum(
            Kd - sd, 0.0)
        return -alpha - scale * np.maximum(Kd - sd, 0.0) + scale * put
    uoc, uip = _barrier_truncated_put_call(m, spec, levels, tau)
    return -alpha + scale * (uoc + uip)


def hatzeta_dynamic(m: MarketParams, spec: OneTouchSpec, t, levels, hit):
    """Q-martingale constraint process for the unhedged sale: -alpha on hit
    paths, -alpha + D_T(S^D/B^D - P(hit by T)) before the barrier."""
    tau = m.T - t
    alpha = spec.alpha_of(m)
    levels = np.asarray(levels, dtype=float)
    if hit:
        return np.full_like(levels, -alpha)
    sd = np.exp(m.sigma * levels)
    q = _hit_prob_flat(levels, m.level_of(spec.Bd(m)), -0.5 * m.sigma, tau)
    return -alpha + m.discount(m.T) * (sd / spec.Bd(m) - q)


# ---------------------------------------------------------------------- #
# semi-static two-stage integration
# ---------------------------------------------------------------------- #

def _gl_nodes(a, b):
    half = 0.5 * (b - a)
    return a + half * (_GL_X + 1.0), half * _GL_W


def _score_fn(m, spec):
    """Tilted-measure score g(u) = phi(u) * max(varphi_Q(u), 0) offered at a
    post-barrier return to the strike line at time u; checked decreasing."""
    Kd = spec.Kd(m)

    def g(u):
        return m.phi_on_strike_line(u, Kd) * np.maximum(varphi_Q(m, spec, u), 0.0)

    probe = g(np.linspace(0.0, m.T, 257))
    if np.any(np.diff(probe) > 1e-12):
        warnings.warn("score function is not decreasing; the two-stage "
                      "representation may be invalid here",
                      RuntimeWarning, stacklevel=3)
    return g


def _score_cutoff(m, spec, g, floor):
    """Largest time with g(u) > floor (0 when the score never exceeds it)."""
    if g(0.0) <= floor:
        return 0.0
    gT = g(m.T)
    if gT > floor:
        return m.T
    return float(brentq(lambda u: g(u) - floor, 0.0, m.T, xtol=1e-12))


def _terminal_value_fn(m, spec):
    """Never-hit terminal score in tilted units, as a function of the raw
    driver endpoint v = x0 + B^Qbar_T."""
    alpha = spec.alpha_of(m)
    Kd = spec.Kd(m)
    beta = m.line_slope(Measure.QBAR)
    th_p = m.theta / m.p
    scale = 1.0 / (spec.B - spec.K)

    def h(v):
        v = np.asarray(v, dtype=float)
        sd = np.exp(m.sigma * (v - beta * m.T))
        phi_T = np.exp(-th_p * (v - m.x0) - 0.5 * th_p * th_p * m.T)
        raw = -alpha + scale * np.maximum(sd - Kd, 0.0)
        return phi_T * np.maximum(raw, 0.0)

    return h


def semi_static_functional(m: MarketParams, spec: OneTouchSpec, floor,
                           transform=None) -> float:
    """E_Qbar[ f( (sup of scored values) v floor ) ] for the superhedged
    sale; f defaults to identity (the budget functional)."""
    if floor < 0:
        raise DomainError("floor must be >= 0")
    f = transform if transform is not None else (lambda x: x)
    f_floor = float(f(floor))
    g = _score_fn(m, spec)
    b_barrier = barrier_boundary(m, spec, Measure.QBAR)
    b_return = return_boundary(m, spec, Measure.QBAR)

    u_cut = _score_cutoff(m, spec, g, floor)
    hit_corr = 0.0
    if u_cut > 0.0:
        s_nodes, s_w = _gl_nodes(0.0, u_cut)
        inner = np.zeros_like(s_nodes)
        for i, s in enumerate(s_nodes):
            c = u_cut - s
            if c <= 0:
                continue
            v_nodes, v_w = _gl_nodes(0.0, c)
            vals = f(g(s + v_nodes)) - f_floor
            inner[i] = float(np.sum(v_w * gamma1(v_nodes, b_return) * vals))
        hit_corr = float(np.sum(s_w * gamma1(s_nodes, b_barrier) * inner))

    h = _terminal_value_fn(m, spec)
    beta = m.line_slope(Measure.QBAR)
    v_top = b_barrier.y + beta * m.T
    v_lo = m.x0 + beta * m.T - 14.0 * math.sqrt(m.T)

    def integrand(v):
        return (f(np.maximum(h(v), floor)) - f_floor) * gamma2(v, m.T, b_barrier)

    term_corr, _ = quad(integrand, v_lo, v_top, epsabs=1e-11, epsrel=1e-10,
                        limit=300)
    return f_floor + hit_corr + float(term_corr)


def utility_semi_static(m: MarketParams, spec: OneTouchSpec) -> tuple[float, float]:
    """Solve the budget equation for the superhedged sale and return
    (wealth floor M, expected utility)."""
    budget = spec.w0_of(m) + spec.premium
    minimal = semi_static_functional(m, spec, 0.0)
    if budget < minimal:
        raise InfeasibleError(
            f"semi-static sale infeasible: budget {budget:.6g} < {minimal:.6g}",
            minimal_budget=minimal, minimal_w0=minimal - spec.premium)
    if budget == minimal:
        M = 0.0
    else:
        M = float(brentq(lambda v: semi_static_functional(m, spec, v) - budget,
                         0.0, budget, xtol=1e-13))
    util = m.cp_constant() * semi_static_functional(
        m, spec, M, transform=lambda x: u_pow(x, m.p))
    return M, util


# ---------------------------------------------------------------------- #
# dynamic-only (lattice) route and its quadrature oracle
# ---------------------------------------------------------------------- #

def onetouch_lattice_spec(m: MarketParams, spec: OneTouchSpec,
                          mode=HedgeMode.DYNAMIC_ONLY, n_steps: int = 400,
                          measure=Measure.QBAR) -> LatticeProcessSpec:
    """Lattice specification for the one-touch constraint obstacle (in
    tilted-measure units) with the barrier-hit layer."""
    mode = HedgeMode.parse(mode)
    hatzeta = hatzeta_dynamic if mode is HedgeMode.DYNAMIC_ONLY \
        else hatzeta_semi_static
    alpha = spec.alpha_of(m)
    Kd, Bd = spec.Kd(m), spec.Bd(m)
    dT = m.discount(m.T)
    scale = 1.0 / (spec.B - spec.K)

    def obstacle(t, levels, hit):
        return m.phi_state(t, levels) * hatzeta(m, spec, t, levels, hit)

    def terminal(levels, hit):
        # left limit of the obstacle at maturity, floored at zero: the exact
        # terminal score of the max-plus representation
        if hit:
            return np.zeros_like(levels)
        sd = np.exp(m.sigma * np.asarray(levels, dtype=float))
        if mode is HedgeMode.DYNAMIC_ONLY:
            raw = -alpha + dT * sd / Bd
        else:
            raw = -alpha + scale * np.maximum(sd - Kd, 0.0)
        return m.phi_state(m.T, levels) * np.maximum(raw, 0.0)

    align = m.level_of(Kd) if mode is HedgeMode.SEMI_STATIC else None
    return LatticeProcessSpec(x0=m.x0, drift=-m.line_slope(measure),
                              horizon=m.T, n_steps=n_steps, obstacle=obstacle,
                              terminal=terminal, align_level=align,
                              barrier=m.level_of(Bd),
                              measure=Measure.parse(measure).value)


def dynamic_only_functional(m: MarketParams, spec: OneTouchSpec, floor,
                            transform=None) -> float:
    """Quadrature oracle for the unhedged sale.

    The constraint process is a Q-martingale before maturity, so its Snell
    envelope collapses onto the terminal slice: the optimal terminal wealth
    is ``(zeta_{T-} v 0) v floor`` with the never-hit terminal given by the
    survival density and hit paths contributing the floor.
    """
    if floor < 0:
        raise DomainError("floor must be >= 0")
    f = transform if transform is not None else (lambda x: x)
    f_floor = float(f(floor))
    alpha = spec.alpha_of(m)
    beta = m.line_slope(Measure.QBAR)
    th_p = m.theta / m.p
    b_barrier = barrier_boundary(m, spec, Measure.QBAR)
    dT = m.discount(m.T)
    Bd = spec.Bd(m)

    def h(v):
        v = np.asarray(v, dtype=float)
        sd = np.exp(m.sigma * (v - beta * m.T))
        phi_T = np.exp(-th_p * (v - m.x0) - 0.5 * th_p * th_p * m.T)
        return phi_T * (-alpha + dT * sd / Bd)

    v_top = b_barrier.y + beta * m.T
    v_lo = m.x0 + beta * m.T - 14.0 * math.sqrt(m.T)

    def integrand(v):
        return (f(np.maximum(h(v), floor)) - f_floor) * gamma2(v, m.T, b_barrier)

    corr, _ = quad(integrand, v_lo, v_top, epsabs=1e-11, epsrel=1e-10,
                   limit=300)
    return f_floor + float(corr)


def utility_dynamic_only(m: MarketParams, spec: OneTouchSpec,
                         n_steps: int = 400) -> tuple[float, float]:
    """Solve the budget equation for the unhedged sale on the lattice Snell
    oracle and return (wealth floor M, expected utility)."""
    budget = spec.w0_of(m) + spec.premium
    sol = snell_lattice(onetouch_lattice_spec(m, spec, HedgeMode.DYNAMIC_ONLY,
                                              n_steps=n_steps))
    grid, curve = sol.dominating_curve(m_values=None)
    minimal = float(curve[0])
    if budget < minimal:
        raise InfeasibleError(
            f"dynamic-only sale infeasible: budget {budget:.6g} < {minimal:.6g}",
            minimal_budget=minimal, minimal_w0=minimal - spec.premium)
    if budget == minimal:
        M = 0.0
    else:
        # F(m) >= m, so the root lies in [0, budget]; extend the curve there
        if grid[-1] < budget:
            grid, curve = sol.dominating_curve(m_values=None, n_grid=641,
                                               m_top=budget)
        M = float(brentq(lambda v: np.interp(v, grid, curve) - budget,
                         0.0, min(budget, grid[-1]), xtol=1e-12))
    _, u_vals = sol.dominating_curve(m_values=[M],
                                     transform=lambda x: u_pow(x, m.p))
    util = m.cp_constant() * float(u_vals[0])
    return M, util


def no_sale_utility(m: MarketParams, spec: OneTouchSpec) -> tuple[float, float]:
    """Baseline without the sale: deterministic terminal wealth w0."""
    w0 = spec.w0_of(m)
    return w0, m.cp_constant() * u_pow(w0, m.p)


# ---------------------------------------------------------------------- #
# certainty equivalents and sweeps
# ---------------------------------------------------------------------- #

def certainty_equivalent(utility: float, m: MarketParams) -> float:
    """Deterministic wealth with the same objective value:
    ((1-p) * utility / c_p)^(1/(1-p))."""
    scaled = (1.0 - m.p) * utility / m.cp_constant()
    if not (scaled >= 0 and np.isfinite(scaled)):
        raise DomainError("utility outside the range of c_p * u_p")
    return float(scaled ** (1.0 / (1.0 - m.p)))


def _solve_mode(m, spec, mode, lattice_steps=400):
    mode = HedgeMode.parse(mode)
    if mode is HedgeMode.SEMI_STATIC:
        return utility_semi_static(m, spec)
    if mode is HedgeMode.DYNAMIC_ONLY:
        return utility_dynamic_only(m, spec, n_steps=lattice_steps)
    return no_sale_utility(m, spec)


def _sweep_w0_dynamic(m, spec, w0_grid, lattice_steps):
    """The lattice does not depend on w0: one backward solve serves the
    whole sweep, with the budget and utility read off the floor curves."""
    top = float(w0_grid[-1]) + spec.premium
    sol = snell_lattice(onetouch_lattice_spec(m, spec, HedgeMode.DYNAMIC_ONLY,
                                              n_steps=lattice_steps))
    mg, budget_curve = sol.dominating_curve(m_top=top)
    _, util_curve = sol.dominating_curve(
        m_top=top, transform=lambda x: u_pow(x, m.p))
    minimal = float(budget_curve[0])
    cp = m.cp_constant()
    rows = []
    for w0 in w0_grid:
        budget = float(w0) + spec.premium
        if budget < minimal:
            rows.append((w0, 1.0, 0.0, 0.0, 0.0, 0.0))
            continue
        M = float(brentq(lambda v: np.interp(v, mg, budget_curve) - budget,
                         0.0, min(budget, mg[-1]), xtol=1e-12)) \
            if budget > minimal else 0.0
        util = cp * float(np.interp(M, mg, util_curve))
        rows.append((w0, 1.0, M, util, certainty_equivalent(util, m), 1.0))
    return rows


def _sweep_w0_semi(m, spec, w0_grid):
    """Bracket each budget equation from one coarse curve of the (shared,
    w0-independent) functional, then refine with the exact functional."""
    top = float(w0_grid[-1]) + spec.premium
    ms = np.linspace(0.0, max(top, 1e-6), 33)
    coarse = np.array([semi_static_functional(m, spec, v) for v in ms])
    rows = []
    for w0 in w0_grid:
        budget = float(w0) + spec.premium
        if budget < coarse[0]:
            rows.append((w0, 0.0, 0.0, 0.0, 0.0, 0.0))
            continue
        guess = float(np.interp(budget, coarse, ms))
        lo = max(0.0, guess - 1.1 * (ms[1] - ms[0]))
        hi = min(budget, guess + 1.1 * (ms[1] - ms[0]))
        while semi_static_functional(m, spec, hi) < budget:
            hi = min(budget, hi + (ms[1] - ms[0]))
        while lo > 0 and semi_static_functional(m, spec, lo) > budget:
            lo = max(0.0, lo - (ms[1] - ms[0]))
        M = float(brentq(lambda v: semi_static_functional(m, spec, v)
                         - budget, lo, hi, xtol=1e-13))
        util = m.cp_constant() * semi_static_functional(
            m, spec, M, transform=lambda x: u_pow(x, m.p))
        rows.append((w0, 0.0, M, util, certainty_equivalent(util, m), 1.0))
    return rows


def sweep(m: MarketParams, spec: OneTouchSpec, mode, variable: str, grid,
          lattice_steps: int = 400, provenance=None) -> ResultTable:
    """Sweep w0 or the hedge strike K; infeasible rows are flagged with
    feasible = 0 and zero placeholders."""
    mode = HedgeMode.parse(mode)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("sweep grid must be strictly ascending")
    if variable not in ("w0", "K"):
        raise DomainError("variable must be 'w0' or 'K'")
    if variable == "w0" and mode is HedgeMode.DYNAMIC_ONLY:
        rows = _sweep_w0_dynamic(m, spec, grid, lattice_steps)
    elif variable == "w0" and mode is HedgeMode.SEMI_STATIC:
        rows = _sweep_w0_semi(m, spec, grid)
    else:
        rows = []
        for value in grid:
            if variable == "w0":
                here = OneTouchSpec(B=spec.B, K=spec.K,
                                    premium=spec.premium, w0=float(value),
                                    alpha=spec.alpha)
            else:
                here = OneTouchSpec(B=spec.B, K=float(value),
                                    premium=spec.premium, w0=spec.w0,
                                    alpha=spec.alpha)
            try:
                M, util = _solve_mode(m, here, mode, lattice_steps)
                ce = certainty_equivalent(util, m)
                rows.append((value, float(mode.code), M, util, ce, 1.0))
            except InfeasibleError:
                rows.append((value, float(mode.code), 0.0, 0.0, 0.0, 0.0))
    prov = dict(provenance or {})
    prov.setdefault("mode_codes", "semi_static=0 dynamic_only=1 no_sale=2")
    prov["mode"] = mode.value
    return ResultTable(name=f"onetouch_{variable}_sweep",
                       columns=(variable, "mode", "M", "utility", "ce",
                                "feasible"),
                       rows=np.asarray(rows, dtype=float), provenance=prov)
