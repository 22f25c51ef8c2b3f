"""Acceptance suite: one callable per exit criterion, with stated
tolerances pinned.

Each check returns a :class:`CheckResult`; ``run_all`` prints one pass/fail
line per criterion and is what the CLI ``verify`` subcommand executes.
``fast=True`` shrinks Monte Carlo and lattice sizes for smoke runs (the
stated tolerances apply to the full-size run).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .arbitrage import bs_curve, check_consistency, construct_arbitrage
from .callmax import (CallPosition, call_lattice_spec, expected_sup_J,
                      make_zeta_star_evaluator, solve_M, zeta)
from .errors import DomainError
from .lattice import snell_lattice
from .market import MarketParams, Measure, _philox
from .onetouch import (OneTouchSpec, dynamic_only_functional,
                       hatzeta_semi_static, hobson_optimal_strike,
                       onetouch_lattice_spec, onetouch_price,
                       onetouch_price_mc, semi_static_functional, sweep)
from .passage import (LineBoundary, first_passage_mc, gamma0, gamma1,
                      gamma1_by_inversion, gamma2, hit_cdf, integrate_gamma1)
from .pricing import atm_forward_call, bs_call, norm_cdf, z as z_index
from .verification import supermartingale_drift, verify_maxplus


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _fig3_market(w0=0.16) -> MarketParams:
    return MarketParams.from_theta(s0=1.2, theta=0.05, r=0.01, sigma=0.5,
                                   T=2.0, p=0.75, w0=w0, alpha=0.4)


def _fig7_market() -> MarketParams:
    return MarketParams.from_theta(s0=1.2, theta=0.05, r=0.01, sigma=0.5,
                                   T=2.0, p=0.75, w0=0.1, alpha=0.1)


_FIG3_POS = dict(K=0.85, delta_c=0.02)
_FIG7_SPEC = dict(B=1.9, K=1.3, premium=0.02)


# ---------------------------------------------------------------------- #
# criteria
# ---------------------------------------------------------------------- #

def check_atm_identity(fast=False) -> CheckResult:
    """bs_call(K*D_T, K, T) equals K*D_T*(2 Phi(sigma sqrt(T)/2) - 1) to
    1e-10 across a randomised parameter grid."""
    t0 = time.time()
    rng = _philox(314159)
    n = 100 if fast else 500
    worst = 0.0
    for _ in range(n):
        K = rng.uniform(0.05, 5.0)
        sigma = rng.uniform(0.05, 1.5)
        T = rng.uniform(0.1, 5.0)
        r = rng.uniform(0.0, 0.10)
        Kd = K * math.exp(-r * T)
        lhs = float(bs_call(Kd, K, T, sigma, r))
        rhs = Kd * (2.0 * norm_cdf(0.5 * sigma * math.sqrt(T)) - 1.0)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("atm_identity", worst < 1e-10,
                       f"max |bs_call(KD,K) - KD(2Phi-1)| = {worst:.2e} "
                       f"over {n} draws (tol 1e-10)", time.time() - t0)


def _fig3_boundary(m=None):
    m = m or _fig3_market()
    pos = CallPosition(lam=3.1, **_FIG3_POS)
    return LineBoundary(x=m.x0, y=m.level_of(pos.Kd(m)),
                        beta=m.line_slope(Measure.QBAR))


def check_density_triangulation(fast=False) -> CheckResult:
    """Closed-form gamma1 vs Laplace inversion (sup abs < 1e-6 on
    u in [0.01, 2]) and vs bridge-corrected Monte Carlo (KS 99% band)."""
    t0 = time.time()
    b = _fig3_boundary()
    us = np.linspace(0.01, 2.0, 40 if fast else 80)
    closed = gamma1(us, b)
    inverted = gamma1_by_inversion(us, b)
    sup_gap = float(np.max(np.abs(closed - inverted)))
    n_paths = 20_000 if fast else 100_000
    n_steps = 1 << (10 if fast else 12)
    grid, hit_step, _ = first_passage_mc(b, 2.0, n_paths, n_steps, seed=42)
    # empirical sub-CDF at step times is exact in distribution
    counts = np.bincount(hit_step[hit_step >= 0], minlength=n_steps)
    emp = np.cumsum(counts) / n_paths
    theo = hit_cdf(grid[1:], b)
    ks = float(np.max(np.abs(emp - theo)))
    band = math.sqrt(math.log(2.0 / 0.01) / (2.0 * n_paths))
    ok = sup_gap < 1e-6 and ks < band
    return CheckResult(
        "density_triangulation", ok,
        f"closed-vs-Laplace sup gap {sup_gap:.2e} (tol 1e-6); "
        f"KS stat {ks:.4f} vs 99% band {band:.4f} ({n_paths} paths)",
        time.time() - t0)


def check_chapman_kolmogorov(fast=False) -> CheckResult:
    """gamma0 = gamma2 + first-hit convolution restart, to 1e-6 by
    quadrature at three (v, t) points."""
    t0 = time.time()
    b = _fig3_boundary()
    worst = 0.0
    for t, v_off in ((0.5, -0.3), (1.0, 0.4), (2.0, 1.1)):
        v = b.y + b.beta * t + b.side() * v_off
        conv, _ = quad(lambda u: gamma1(u, b) * gamma0(v, t - u,
                                                       b.y + b.beta * u),
                       0.0, t, epsabs=1e-10, epsrel=1e-10, limit=300)
        lhs = gamma0(v, t, b.x)
        rhs = gamma2(v, t, b) + conv
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("chapman_kolmogorov", worst < 1e-6,
                       f"max identity residual {worst:.2e} at three (v,t) "
                       "points (tol 1e-6)", time.time() - t0)


def check_maxplus_verification(fast=False) -> CheckResult:
    """Monte Carlo check of the max-plus representation of the call-case
    constraint envelope at t in {0, T/4, T/2} (3 standard errors), with a
    shifted-score negative control exceeding 5 standard errors."""
    t0 = time.time()
    m = _fig3_market()
    pos = CallPosition(lam=3.1, **_FIG3_POS)
    Kd = pos.Kd(m)
    times = [0.0, m.T / 4, m.T / 2]
    n_paths = 30_000 if fast else 100_000
    n_steps = 512 if fast else 2048
    x_eval = make_zeta_star_evaluator(m, pos)
    level = m.level_of(Kd)
    report = verify_maxplus(m, level, lambda u: z_index(m, u, pos.lam, Kd),
                            x_eval, times, Measure.QBAR, n_paths, n_steps,
                            seed=1234)
    control = verify_maxplus(
        m, level, lambda u: z_index(m, u, pos.lam, Kd) + 0.1, x_eval, times,
        Measure.QBAR, min(n_paths, 30_000), n_steps, seed=1234)
    ok = report.within(3.0) and control.max_n_sigma > 5.0
    sig = ", ".join(f"t={d.t:g}: {d.n_sigma:.2f}sigma"
                    for d in report.deviations)
    return CheckResult(
        "maxplus_verification", ok,
        f"representation deviations [{sig}] (tol 3 sigma); shifted-z "
        f"control at {control.max_n_sigma:.1f} sigma (> 5 required)",
        time.time() - t0)


def check_m_equation(fast=False) -> CheckResult:
    """Budget-equation residual below 1e-9*(1+w0); M(lambda) exactly linear
    while the floor never binds and numerically concave beyond."""
    t0 = time.time()
    m = _fig3_market()
    # the default budget w0 = 0.16 supports quantities up to ~3.92
    lams = np.linspace(0.2, 3.9, 16 if fast else 30)
    rows = []
    worst_res = 0.0
    linear_ok = True
    for lam in lams:
        pos = CallPosition(lam=float(lam), **_FIG3_POS)
        sol = solve_M(m, pos)
        if not sol.feasible:
            return CheckResult("m_equation", False,
                               f"unexpected infeasibility at lambda={lam:g}",
                               time.time() - t0)
        worst_res = max(worst_res, sol.residual)
        rows.append((lam, sol.M, sol.rstar))
        if sol.rstar == 0.0 and abs(sol.M - sol.budget) > 0:
            linear_ok = False
    rows = np.asarray(rows)
    binding = rows[rows[:, 2] > 0]
    concave_ok = True
    if len(binding) >= 3:
        second = np.diff(binding[:, 1], 2)
        concave_ok = bool(np.all(second <= 1e-8))
    tol = 1e-9 * (1.0 + m.w0)
    ok = worst_res < tol and linear_ok and concave_ok and len(binding) >= 3
    return CheckResult(
        "m_equation", ok,
        f"max residual {worst_res:.2e} (tol {tol:.1e}); linear segment "
        f"exact: {linear_ok}; concave beyond (n={len(binding)}): {concave_ok}",
        time.time() - t0)


def check_fig5_headline(fast=False) -> CheckResult:
    """Utility-maximising quantity lies in [2.8, 3.4] on the headline
    parameter set (60-point grid)."""
    t0 = time.time()
    m = _fig3_market()
    lams = np.linspace(0.1, 6.0, 30 if fast else 60)
    best_lam, best_util = None, -np.inf
    for lam in lams:
        sol = solve_M(m, CallPosition(lam=float(lam), **_FIG3_POS))
        if sol.feasible and sol.utility > best_util:
            best_lam, best_util = float(lam), sol.utility
    ok = best_lam is not None and 2.8 <= best_lam <= 3.4
    return CheckResult("fig5_headline", ok,
                       f"utility-maximising lambda* = {best_lam:.3f} "
                       "(band [2.8, 3.4])", time.time() - t0)


def check_lattice_agreement(fast=False) -> CheckResult:
    """Snell lattice reproduces the closed-form budget functional at the
    solved floor within 0.5% at ~400x400, gap roughly halving at 800x800."""
    t0 = time.time()
    m = _fig3_market()
    pos = CallPosition(lam=3.1, **_FIG3_POS)
    sol = solve_M(m, pos)
    closed = expected_sup_J(m, pos, sol.M)
    sizes = (100, 200) if fast else (400, 800)
    gaps = []
    for n in sizes:
        lat = snell_lattice(call_lattice_spec(m, pos, n_steps=n))
        val = lat.dominating_value(sol.M)
        gaps.append(abs(val - closed) / closed)
    ok = gaps[0] < 5e-3 and gaps[1] < 0.75 * gaps[0]
    return CheckResult(
        "lattice_agreement", ok,
        f"relative gap {gaps[0]:.2e} at n={sizes[0]} (tol 5e-3), "
        f"{gaps[1]:.2e} at n={sizes[1]} (ratio {gaps[1]/gaps[0]:.2f}, "
        "roughly halving)", time.time() - t0)


def check_onetouch_price(fast=False) -> CheckResult:
    """One-touch price 0.41 +- 0.01, triple-checked: closed-form barrier
    probability, gamma1 integral, bridge-corrected Monte Carlo."""
    t0 = time.time()
    m = _fig7_market()
    spec = OneTouchSpec(**_FIG7_SPEC)
    analytic = onetouch_price(m, spec)
    b = LineBoundary(x=m.x0, y=m.level_of(spec.Bd(m)),
                     beta=m.line_slope(Measure.Q))
    via_gamma1 = m.discount(m.T) * integrate_gamma1(lambda u: 1.0, b, 0.0,
                                                    m.T, epsabs=1e-10)
    mc, se = onetouch_price_mc(m, spec, n_paths=20_000 if fast else 100_000,
                               n_steps=1 << (10 if fast else 12), seed=5)
    ok = (abs(analytic - 0.41) < 0.01
          and abs(via_gamma1 - analytic) < 1e-8
          and abs(mc - analytic) < 3.0 * se)
    return CheckResult(
        "onetouch_price", ok,
        f"analytic {analytic:.4f} (target 0.41 +- 0.01); gamma1 route gap "
        f"{abs(via_gamma1-analytic):.1e}; MC {mc:.4f} +- {se:.4f}",
        time.time() - t0)


def check_onetouch_thresholds(fast=False) -> CheckResult:
    """Minimal initial wealth to implement the sale at replication cost:
    0.08 +- 0.02 (semi-static) and 0.18 +- 0.03 (dynamic-only), with the
    semi-static threshold strictly lower."""
    t0 = time.time()
    m = _fig7_market()
    spec = OneTouchSpec(**_FIG7_SPEC)
    semi = semi_static_functional(m, spec, 0.0)
    lat = snell_lattice(onetouch_lattice_spec(
        m, spec, "dynamic_only", n_steps=150 if fast else 400))
    dyn = lat.dominating_value(0.0)
    dyn_oracle = dynamic_only_functional(m, spec, 0.0)
    ok = (abs(semi - 0.08) < 0.02 and abs(dyn - 0.18) < 0.03
          and semi < dyn and abs(dyn - dyn_oracle) / dyn_oracle < 0.02)
    return CheckResult(
        "onetouch_thresholds", ok,
        f"semi-static {semi:.4f} (0.08 +- 0.02); dynamic-only lattice "
        f"{dyn:.4f} (0.18 +- 0.03; quadrature oracle {dyn_oracle:.4f}); "
        f"ordering semi < dynamic: {semi < dyn}", time.time() - t0)


def check_ce_unimodality(fast=False) -> CheckResult:
    """Certainty equivalent against the hedge strike is single-peaked over
    (0.5, 1.8) at w0 = 0.1, with the peak within 0.2 of the cost-minimal
    superhedge strike."""
    t0 = time.time()
    m = _fig7_market()
    spec = OneTouchSpec(**_FIG7_SPEC, w0=0.1)
    grid = np.linspace(0.5, 1.8, 14 if fast else 27)
    table = sweep(m, spec, "semi_static", "K", grid)
    feas = table.column("feasible") > 0
    ks, ces = table.column("K")[feas], table.column("ce")[feas]
    if len(ks) < 5:
        return CheckResult("ce_unimodality", False,
                           "too few feasible strikes", time.time() - t0)
    peak = int(np.argmax(ces))
    rising = np.all(np.diff(ces[:peak + 1]) > -1e-9)
    falling = np.all(np.diff(ces[peak:]) < 1e-9)
    k_star = hobson_optimal_strike(m, spec.B)
    ok = bool(rising and falling and abs(ks[peak] - k_star) <= 0.2)
    return CheckResult(
        "ce_unimodality", ok,
        f"single-peaked: {bool(rising and falling)}; peak at K={ks[peak]:.3f} "
        f"vs cost-minimal strike {k_star:.3f} (|gap| <= 0.2)",
        time.time() - t0)


def check_arbitrage_suite(fast=False) -> CheckResult:
    """On 100 randomly perturbed model curves with one injected violation
    each: the injected condition is flagged and the constructed portfolio
    banks epsilon > 0 with a nonnegative intrinsic-wealth floor; zero false
    positives on unperturbed curves."""
    t0 = time.time()
    rng = _philox(271828)
    kinds = ["convexity", "monotonicity", "spot_anchor", "slope",
             "nonnegativity"]
    n_cases = 40 if fast else 100
    failures = []
    false_pos = 0
    for case in range(n_cases):
        m = MarketParams.from_theta(
            s0=float(rng.uniform(0.5, 2.0)), theta=float(rng.uniform(-0.2, 0.3)),
            r=float(rng.uniform(0.0, 0.05)), sigma=float(rng.uniform(0.15, 0.8)),
            T=float(rng.uniform(0.25, 3.0)), p=0.5)
        strikes = np.concatenate([[0.0], np.sort(rng.uniform(
            0.1 * m.s0, 3.0 * m.s0, 8))])
        curve = bs_curve(m, strikes)
        dT = m.discount(m.T)
        if not check_consistency(curve, dT=dT, tol=1e-11).clean:
            false_pos += 1
            continue
        kind = kinds[case % len(kinds)]
        prices = curve.prices.copy()
        delta = float(rng.uniform(0.002, 0.02))
        if kind == "convexity":
            lam = (strikes[5] - strikes[4]) / (strikes[5] - strikes[3])
            prices[4] = lam * prices[3] + (1 - lam) * prices[5] + delta
        elif kind == "monotonicity":
            prices[5] = prices[4] + delta
        elif kind == "spot_anchor":
            prices[0] += delta * (1 if rng.random() < 0.5 else -1)
        elif kind == "slope":
            prices[1] = prices[0] - dT * strikes[1] - delta
        else:
            prices[-1] = -delta
        from .arbitrage import CallCurve
        bad = CallCurve.from_arrays(strikes, prices, m.s0, m.T)
        report = check_consistency(bad, dT=dT)
        flagged = [v for v in report.violations if v.kind == kind]
        if not flagged:
            failures.append(f"case {case}: {kind} not flagged")
            continue
        port = construct_arbitrage(bad, flagged[0], dT=dT)
        if not (port.epsilon > 0 and port.wealth_floor >= -1e-12):
            failures.append(
                f"case {case}: certificate failed (eps={port.epsilon:.3g}, "
                f"floor={port.wealth_floor:.3g})")
    ok = not failures and false_pos == 0
    return CheckResult(
        "arbitrage_suite", ok,
        f"{n_cases} injected violations certified, {false_pos} false "
        f"positives" + (f"; failures: {failures[:3]}" if failures else ""),
        time.time() - t0)


def check_supermartingale(fast=False) -> CheckResult:
    """Sample drift of the constraint processes: the call-case process
    under the tilted measure and the one-touch package process under the
    risk-neutral measure show non-positive drift within 3 standard errors."""
    t0 = time.time()
    n_paths = 20_000 if fast else 100_000
    n_steps = 256 if fast else 1024
    m3 = _fig3_market()
    pos = CallPosition(lam=3.1, **_FIG3_POS)
    cps = list(np.linspace(0.0, m3.T * 0.999, 9))

    def eval_call(t, levels, hit):
        return zeta(m3, pos, t, np.exp(m3.sigma * levels))

    drift_call = supermartingale_drift(m3, eval_call, Measure.QBAR, cps,
                                       n_paths, n_steps, seed=21)
    m7 = _fig7_market()
    spec = OneTouchSpec(**_FIG7_SPEC)

    def eval_hat(t, levels, hit):
        on = hatzeta_semi_static(m7, spec, t, levels, True)
        off = hatzeta_semi_static(m7, spec, t, levels, False)
        return np.where(hit, on, off)

    drift_hat = supermartingale_drift(
        m7, eval_hat, Measure.Q, cps, n_paths, n_steps, seed=22,
        barrier_level=m7.level_of(spec.Bd(m7)))
    worst = max(inc / se for _, _, inc, se in drift_call + drift_hat)
    ok = worst <= 3.0
    return CheckResult(
        "supermartingale_drift", ok,
        f"max standardised interval drift {worst:.2f} sigma over "
        f"{len(drift_call) + len(drift_hat)} intervals (tol +3 sigma)",
        time.time() - t0)


ALL_CHECKS = [
    check_atm_identity,
    check_density_triangulation,
    check_chapman_kolmogorov,
    check_m_equation,
    check_fig5_headline,
    check_onetouch_price,
    check_arbitrage_suite,
    check_ce_unimodality,
    check_onetouch_thresholds,
    check_lattice_agreement,
    check_maxplus_verification,
    check_supermartingale,
]


def run_all(fast=False, checks=None) -> bool:
    results = []
    for fn in checks or ALL_CHECKS:
        res = fn(fast=fast)
        results.append(res)
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: "
              f"{res.detail} ({res.seconds:.1f}s)", flush=True)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} acceptance criteria passed")
    return n_pass == len(results)
