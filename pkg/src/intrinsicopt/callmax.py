"""Optimal wealth for a long call position under the intrinsic floor.

In the decreasing-z regime the optimal terminal wealth (in tilted-measure
units) is ``(z(H) v 0) v M`` where H is the first time the discounted price
touches the discounted strike and M solves the budget equation

    w0 + lambda*DeltaC = M + int_0^{r*(M)} gamma1(u) (z(u) - M) du,

with ``r*(M) = inf{u < T : z(u) < M} ^ T`` and gamma1 the first-passage
density of H under the tilted measure.  Outside that regime the solver
falls back to the lattice Snell oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleError, UnsupportedRegimeError
from .lattice import LatticeProcessSpec, LatticeSolution, snell_lattice
from .market import MarketParams, Measure
from .passage import LineBoundary, gamma1, hit_cdf, integrate_gamma1
from .pricing import expected_local_time, z as z_index
from .tables import ResultTable


@dataclass(frozen=True)
class CallPosition:
    """A long position of ``lam`` calls struck at K, bought ``delta_c``
    per unit below the replication price."""

    K: float
    lam: float
    delta_c: float = 0.0

    def __post_init__(self):
        if self.K <= 0:
            raise DomainError("strike must be > 0")
        if self.lam < 0:
            raise DomainError("quantity must be >= 0")

    def Kd(self, m: MarketParams) -> float:
        return m.discounted_strike(self.K)


@dataclass(frozen=True)
class MaxPlusSolution:
    """Solved wealth floor and objective for one position."""

    feasible: bool
    M: float | None = None
    rstar: float | None = None
    utility: float | None = None
    budget: float | None = None
    residual: float | None = None
    minimal_budget: float | None = None
    method: str = "closed_form"


def u_pow(x, p):
    """Power utility x^(1-p)/(1-p); requires x >= 0."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("wealth must be >= 0 under power utility")
    out = x_arr ** (1.0 - p) / (1.0 - p)
    return float(out) if out.ndim == 0 else out


def strike_boundary(m: MarketParams, pos: CallPosition, measure=Measure.QBAR) -> LineBoundary:
    """Linear-boundary form of {S^D = K^D} for the measure's driver."""
    return LineBoundary(x=m.x0, y=m.level_of(pos.Kd(m)),
                        beta=m.line_slope(measure))


# ---------------------------------------------------------------------- #
# the constraint process and its index
# ---------------------------------------------------------------------- #

def zeta(m: MarketParams, pos: CallPosition, t, sd):
    """Intrinsic-floor process zeta_t in tilted-measure units:
    phi_t * (lam * E_Q[L_T - L_t | S^D_t = sd] - alpha).

    Reduces to -alpha * phi_t for lam = 0 and to z(t) on the strike line.
    """
    sd_arr = np.asarray(sd, dtype=float)
    level = np.log(sd_arr) / m.sigma
    elt = expected_local_time(sd_arr, pos.Kd(m), m.T - t, m.sigma)
    out = m.phi_state(t, level) * (pos.lam * elt - m.alpha)
    return float(out) if out.ndim == 0 else out


def _z(m, pos, u):
    return z_index(m, u, pos.lam, pos.Kd(m))


def rstar(m: MarketParams, pos: CallPosition, M: float) -> float:
    """Binding horizon r*(M) = inf{u < T : z(u) < M} ^ T, located to a time
    tolerance of 1e-10*T.  Requires the decreasing-z regime."""
    if not m.z_decreasing:
        raise UnsupportedRegimeError(
            "z is not guaranteed decreasing (need theta > 0 and p*sigma > theta)")
    z0 = _z(m, pos, 0.0)
    zT = _z(m, pos, m.T)
    if M >= z0:
        return 0.0
    if M <= zT:
        return m.T
    return float(brentq(lambda u: _z(m, pos, u) - M, 0.0, m.T,
                        xtol=1e-10 * m.T))


def expected_sup_J(m: MarketParams, pos: CallPosition, M: float) -> float:
    """E_Qbar[(z(H) v 0) v M] = M + int_0^{r*(M)} gamma1(u) (z(u) - M) du
    for a floor M >= 0; strictly increasing in M."""
    if M < 0:
        raise DomainError("floor M must be >= 0")
    if m.s0 == pos.Kd(m):
        raise DomainError("degenerate case S_0 = K^D")
    r = rstar(m, pos, M)
    if r <= 0.0:
        return float(M)
    b = strike_boundary(m, pos)
    return float(M) + integrate_gamma1(lambda u: _z(m, pos, u) - M, b, 0.0, r,
                                       epsabs=1e-12, epsrel=1e-12)


# ---------------------------------------------------------------------- #
# solving the budget equation
# ---------------------------------------------------------------------- #

def solve_M(m: MarketParams, pos: CallPosition, w0: float | None = None,
            method: str = "auto") -> MaxPlusSolution:
    """Solve the budget equation for the wealth floor M.

    Returns an infeasible solution (with the minimal budget recorded) when
    ``w0 + lam*DeltaC`` is below the cost of the unfloored supremum.  In the
    non-binding region (M >= z(0)) the solution is exactly the linear
    segment M = w0 + lam*DeltaC.
    """
    w0 = m.w0 if w0 is None else float(w0)
    budget = w0 + pos.lam * pos.delta_c
    if budget < 0:
        raise DomainError("budget w0 + lam*DeltaC must be >= 0")
    if method == "auto":
        method = "closed_form" if m.z_decreasing else "lattice"
    if method == "lattice":
        return _solve_lattice(m, pos, w0)

    threshold = expected_sup_J(m, pos, 0.0)
    if budget < threshold:
        return MaxPlusSolution(feasible=False, budget=budget,
                               minimal_budget=threshold)
    if budget >= _z(m, pos, 0.0):
        # constraint never binds: the budget map is the identity there
        M = budget
    elif budget == threshold:
        M = 0.0
    else:
        hi = budget
        while expected_sup_J(m, pos, hi) < budget:   # safety; F(b) >= b
            hi *= 2.0
        M = float(brentq(lambda v: expected_sup_J(m, pos, v) - budget,
                         0.0, hi, xtol=1e-14, maxiter=200))
    residual = abs(expected_sup_J(m, pos, M) - budget)
    if residual > 1e-9 * (1.0 + w0):
        raise RuntimeError(
            f"budget equation residual {residual:.2e} exceeds tolerance; "
            "this should be impossible for the monotone map")
    r = rstar(m, pos, M)
    util = _utility_at(m, pos, M, r)
    return MaxPlusSolution(feasible=True, M=M, rstar=r, utility=util,
                           budget=budget, residual=residual,
                           minimal_budget=threshold)


def _utility_at(m: MarketParams, pos: CallPosition, M: float, r: float) -> float:
    cp = m.cp_constant()
    uM = u_pow(M, m.p)
    if r <= 0.0:
        return cp * uM
    b = strike_boundary(m, pos)
    integral = integrate_gamma1(
        lambda u: u_pow(_z(m, pos, u), m.p) - uM, b, 0.0, r,
        epsabs=1e-12, epsrel=1e-12)
    return cp * (uM + integral)


def optimal_utility(m: MarketParams, pos: CallPosition,
                    w0: float | None = None) -> float:
    """P-expected utility of the optimal admissible strategy:
    c_p * (u_p(M) + int_0^{r*} gamma1(s) {u_p(z(s)) - u_p(M)} ds)."""
    sol = solve_M(m, pos, w0)
    if not sol.feasible:
        w0 = m.w0 if w0 is None else w0
        raise InfeasibleError(
            f"position infeasible: budget {sol.budget:.6g} < required "
            f"{sol.minimal_budget:.6g}",
            minimal_budget=sol.minimal_budget,
            minimal_w0=sol.minimal_budget - pos.lam * pos.delta_c)
    return sol.utility


def zeta_star_on_levels(m: MarketParams, pos: CallPosition, t, levels,
                        measure=Measure.QBAR):
    """Snell envelope of the constraint process at time t across driver
    levels: the expected positive part of the score at the next strike-line
    visit, int_0^{(r*(0)-t)_+ ^ (T-t)} gamma1(v; level -> line) z(t+v) dv."""
    r0 = rstar(m, pos, 0.0)
    hi = min(m.T - t, max(r0 - t, 0.0))
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    out = np.zeros_like(levels)
    if hi <= 0:
        return out
    y = m.level_of(pos.Kd(m))
    beta = m.line_slope(measure)
    for i, level in enumerate(levels):
        if level == y:
            level += 1e-12
        b = LineBoundary(x=float(level), y=y, beta=beta)
        out[i] = integrate_gamma1(lambda v: _z(m, pos, t + v), b, 0.0, hi,
                                  epsabs=1e-10, epsrel=1e-10)
    return out


def make_zeta_star_evaluator(m: MarketParams, pos: CallPosition,
                             measure=Measure.QBAR, n_grid=1600):
    """Interpolating evaluator of the envelope, cached per conditioning
    time; built for Monte Carlo verification over many path states."""
    cache: dict = {}

    def evaluate(t, levels):
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        lo, hi = float(levels.min()), float(levels.max())
        if hi - lo < 1e-12:
            return np.full_like(levels, zeta_star_on_levels(
                m, pos, t, [lo], measure)[0])
        key = round(float(t), 12)
        entry = cache.get(key)
        if entry is None or lo < entry[0][0] or hi > entry[0][-1]:
            grid = np.linspace(lo - 0.05, hi + 0.05, n_grid)
            cache[key] = (grid, zeta_star_on_levels(m, pos, t, grid, measure))
            entry = cache[key]
        return np.interp(levels, entry[0], entry[1])

    return evaluate


# ---------------------------------------------------------------------- #
# lattice fallback (non-monotone z regime)
# ---------------------------------------------------------------------- #

def call_lattice_spec(m: MarketParams, pos: CallPosition, n_steps: int = 400,
                      measure=Measure.QBAR) -> LatticeProcessSpec:
    """Lattice specification for the call-position obstacle zeta^0 (zeta
    before maturity, 0 at maturity) under the given measure."""
    y = m.level_of(pos.Kd(m))

    def obstacle(t, levels, hit):
        sd = np.exp(m.sigma * levels)
        elt = expected_local_time(sd, pos.Kd(m), m.T - t, m.sigma)
        return m.phi_state(t, levels) * (pos.lam * elt - m.alpha)

    return LatticeProcessSpec(x0=m.x0, drift=-m.line_slope(measure),
                              horizon=m.T, n_steps=n_steps, obstacle=obstacle,
                              align_level=y, measure=Measure.parse(measure).value)


def _solve_lattice(m, pos, w0, n_steps: int = 400) -> MaxPlusSolution:
    warnings.warn("recursive-z regime: falling back to the lattice Snell "
                  "oracle", RuntimeWarning, stacklevel=2)
    budget = w0 + pos.lam * pos.delta_c
    sol = snell_lattice(call_lattice_spec(m, pos, n_steps=n_steps))
    grid, curve = sol.dominating_curve(m_top=budget)
    threshold = float(curve[0])
    if budget < threshold:
        return MaxPlusSolution(feasible=False, budget=budget,
                               minimal_budget=threshold, method="lattice")
    M = float(brentq(lambda v: np.interp(v, grid, curve) - budget,
                     0.0, min(budget, grid[-1]), xtol=1e-12))
    _, exact = sol.dominating_curve(m_values=[M])
    residual = abs(float(exact[0]) - budget)
    _, u_vals = sol.dominating_curve(m_values=[M],
                                     transform=lambda v: u_pow(v, m.p))
    util = m.cp_constant() * float(u_vals[0])
    return MaxPlusSolution(feasible=True, M=M, rstar=None, utility=util,
                           budget=budget, residual=residual,
                           minimal_budget=threshold, method="lattice")


# ---------------------------------------------------------------------- #
# distribution of the optimal wealth and sweeps
# ---------------------------------------------------------------------- #

def terminal_wealth_cdf(m: MarketParams, pos: CallPosition, w0=None,
                        grid=None, measure=Measure.QBAR,
                        provenance=None) -> ResultTable:
    """CDF of the optimal terminal wealth (z(H) v 0) v M on a level grid.

    M always solves the budget equation under the tilted measure; the
    distribution of the hitting time H is taken under ``measure`` via the
    slope mapping.  There is an atom of mass 1 - P(H <= r*(M)) at M.
    """
    sol = solve_M(m, pos, w0)
    if not sol.feasible:
        raise InfeasibleError("infeasible position",
                              minimal_budget=sol.minimal_budget)
    if grid is None:
        z0 = _z(m, pos, 0.0)
        top = max(z0, sol.M) * 1.05 + 1e-6
        grid = np.linspace(max(0.0, sol.M - 0.1 * abs(sol.M) - 1e-3), top, 201)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("wealth grid must be strictly ascending")
    b = strike_boundary(m, pos, measure)
    cdf = np.empty_like(grid)
    for i, w in enumerate(grid):
        if w < sol.M:
            cdf[i] = 0.0
        else:
            cdf[i] = 1.0 - hit_cdf(rstar(m, pos, w), b)
    prov = dict(provenance or {})
    prov.update({"lambda": pos.lam, "M": sol.M, "measure": Measure.parse(measure).value})
    return ResultTable(name="terminal_wealth_cdf",
                       columns=("wealth_level", "cdf"),
                       rows=np.column_stack([grid, cdf]), provenance=prov)


def lambda_sweep(m: MarketParams, K: float, delta_c: float, lambdas,
                 w0: float | None = None, provenance=None) -> ResultTable:
    """Solve M, r*, and utility across a quantity grid."""
    rows = []
    for lam in np.asarray(lambdas, dtype=float):
        pos = CallPosition(K=K, lam=float(lam), delta_c=delta_c)
        sol = solve_M(m, pos, w0)
        if not sol.feasible:
            raise InfeasibleError(
                f"lambda = {lam:.6g} infeasible (budget {sol.budget:.6g} < "
                f"required {sol.minimal_budget:.6g}); shrink the grid",
                minimal_budget=sol.minimal_budget)
        rows.append((lam, sol.M, sol.rstar, sol.utility))
    return ResultTable(name="call_sweep",
                       columns=("lambda", "M", "rstar", "utility"),
                       rows=np.asarray(rows, dtype=float),
                       provenance=dict(provenance or {}))
