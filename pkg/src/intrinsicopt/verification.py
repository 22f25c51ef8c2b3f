"""Monte Carlo verification of max-plus representations.

``verify_maxplus`` checks, at sampled times t, the identity

    X_t = E[ sup_{t <= u <= T} J_u | F_t ]

for an index process J supported on the first visits to a line (scored by a
deterministic function of time, with later visits dominated by earlier
ones) plus a terminal value.  Paths are simulated under the stated measure
with bridge-corrected crossing detection; the comparison is paired per
path (the supremum sample minus the evaluated X at the path's state), so a
correct representation yields a mean difference within Monte Carlo error
and a mis-specified score is rejected loudly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .market import MarketParams, Measure, _philox


@dataclass(frozen=True)
class MaxPlusDeviation:
    """Paired-difference summary at one conditioning time."""

    t: float
    mean_diff: float
    se: float
    n_paths: int

    @property
    def n_sigma(self) -> float:
        return abs(self.mean_diff) / self.se if self.se > 0 else math.inf


@dataclass(frozen=True)
class MaxPlusReport:
    deviations: tuple

    @property
    def max_n_sigma(self) -> float:
        return max(d.n_sigma for d in self.deviations)

    def within(self, n_sigma: float) -> bool:
        return self.max_n_sigma <= n_sigma


def verify_maxplus(m: MarketParams, level: float, score, x_eval, times,
                   measure=Measure.QBAR, n_paths=100_000, n_steps=2048,
                   seed=7, terminal_score=None, chunk_size=16384) -> MaxPlusReport:
    """Verify a line-scored max-plus representation by simulation.

    Parameters
    ----------
    level : float
        Driver level of the scoring line (log(discounted level)/sigma).
    score : callable
        Deterministic score J at a line visit, as a function of time;
        the supremum over later visits must be attained at the first one.
    x_eval : callable
        ``x_eval(t, levels) -> values``: the supermartingale being verified,
        evaluated at the paths' driver levels.
    times : sequence of float
        Conditioning times t in [0, T).
    terminal_score : callable or None
        ``terminal_score(levels) -> values`` scored at maturity
        (default zero).
    """
    measure = Measure.parse(measure)
    times = sorted(float(t) for t in times)
    if any(t < 0 or t >= m.T for t in times):
        raise DomainError("conditioning times must lie in [0, T)")
    beta = m.line_slope(measure)
    dt = m.T / n_steps
    sqdt = math.sqrt(dt)
    grid = dt * np.arange(n_steps + 1)
    line = level + beta * grid                      # raw-driver coordinates
    t_index = [int(math.ceil(t / dt - 1e-12)) for t in times]

    sums = np.zeros(len(times))
    sumsq = np.zeros(len(times))
    count = 0
    chunk_id = 0
    done = 0
    while done < n_paths:
        size = min(chunk_size, n_paths - done)
        rng = _philox(seed, spawn_key=(chunk_id,))
        w = np.full(size, m.x0)
        d_prev = w - line[0]
        hit_value = np.full((len(times), size), -np.inf)
        hit_found = np.zeros((len(times), size), dtype=bool)
        states = np.empty((len(times), size))
        for j, ti in enumerate(t_index):
            if ti == 0:
                states[j] = w
        for k in range(n_steps):
            w = w + rng.standard_normal(size) * sqdt
            d_next = w - line[k + 1]
            straddle = d_prev * d_next <= 0
            prob = np.exp(np.clip(-2.0 * d_prev * d_next / dt, -745.0, 0.0))
            crossed = straddle | (rng.random(size) < prob)
            if crossed.any():
                # first-order conditional crossing time inside the step:
                # |d0|/(|d0|+|d1|) is the linear zero-cross for sign changes
                # and the Laplace point of the graze probability otherwise
                a, bb = np.abs(d_prev), np.abs(d_next)
                t_cross = grid[k] + dt * a / np.maximum(a + bb, 1e-300)
                for j, ti in enumerate(t_index):
                    if k >= ti:
                        fresh = crossed & ~hit_found[j]
                        if fresh.any():
                            hit_value[j, fresh] = score(
                                np.minimum(t_cross[fresh], m.T))
                            hit_found[j, fresh] = True
            d_prev = d_next
            for j, ti in enumerate(t_index):
                if k + 1 == ti:
                    states[j] = w
        term = np.zeros(size) if terminal_score is None else np.asarray(
            terminal_score(w - beta * m.T), dtype=float)
        for j, t in enumerate(times):
            sup = np.maximum(np.where(hit_found[j], hit_value[j], -np.inf), term)
            levels_at_t = states[j] - beta * t
            diff = sup - np.asarray(x_eval(t, levels_at_t), dtype=float)
            sums[j] += diff.sum()
            sumsq[j] += (diff * diff).sum()
        count += size
        done += size
        chunk_id += 1

    devs = []
    for j, t in enumerate(times):
        mean = sums[j] / count
        var = max(sumsq[j] / count - mean * mean, 0.0)
        se = math.sqrt(var / count)
        devs.append(MaxPlusDeviation(t=t, mean_diff=mean, se=se, n_paths=count))
    return MaxPlusReport(deviations=tuple(devs))


def supermartingale_drift(m: MarketParams, evaluate, measure, checkpoints,
                          n_paths=100_000, n_steps=1024, seed=11,
                          barrier_level=None, chunk_size=16384):
    """Sample drift of a path functional between checkpoint times.

    ``evaluate(t, levels, hit)`` is evaluated at each checkpoint on the
    simulated driver levels (and barrier-hit flags when ``barrier_level``
    is given).  Returns a list of ``(t0, t1, mean_increment, se)``; a
    supermartingale should show mean increments <= 0 within error.
    """
    measure = Measure.parse(measure)
    beta = m.line_slope(measure)
    dt = m.T / n_steps
    sqdt = math.sqrt(dt)
    grid = dt * np.arange(n_steps + 1)
    cps = sorted(float(t) for t in checkpoints)
    if cps[0] > 0.0:
        cps = [0.0] + cps
    idx = [min(int(round(t / dt)), n_steps) for t in cps]
    cps = [grid[i] for i in idx]
    line = None if barrier_level is None else barrier_level + beta * grid

    values = np.zeros((len(cps), 0))
    all_vals = []
    done = 0
    chunk_id = 0
    while done < n_paths:
        size = min(chunk_size, n_paths - done)
        rng = _philox(seed, spawn_key=(chunk_id,))
        w = np.full(size, m.x0)
        hit = np.zeros(size, dtype=bool)
        vals = np.empty((len(cps), size))
        if line is not None:
            hit |= (w - line[0]) >= 0
        pos = 0
        for j, ti in enumerate(idx):
            if ti == 0:
                vals[j] = evaluate(0.0, w - beta * 0.0, hit.copy())
        d_prev = None if line is None else w - line[0]
        for k in range(n_steps):
            w = w + rng.standard_normal(size) * sqdt
            if line is not None:
                d_next = w - line[k + 1]
                straddle = d_prev * d_next >= 0
                # crossing toward the barrier from below; exact for the line
                upcross = (d_next >= 0) | (d_prev >= 0)
                prob = np.exp(np.clip(-2.0 * d_prev * d_next / dt, -745.0, 0.0))
                hit |= upcross | (rng.random(size) < prob)
                d_prev = d_next
            for j, ti in enumerate(idx):
                if k + 1 == ti:
                    t = grid[ti]
                    vals[j] = evaluate(t, w - beta * t, hit.copy())
        all_vals.append(vals)
        done += size
        chunk_id += 1
    vals = np.concatenate(all_vals, axis=1)
    out = []
    for j in range(len(cps) - 1):
        inc = vals[j + 1] - vals[j]
        out.append((cps[j], cps[j + 1], float(inc.mean()),
                    float(inc.std(ddof=1) / math.sqrt(inc.shape[0]))))
    return out
