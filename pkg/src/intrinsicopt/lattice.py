"""Snell-envelope lattice oracle.

A trinomial Markov-chain approximation of the measure's driver (Brownian
motion with constant drift), with the state grid anchored so that a chosen
level (e.g. the discounted strike line) passes exactly through grid nodes.
Mean and variance are matched exactly at every step.

The lattice serves two purposes:

* backward induction gives the Snell envelope of an obstacle process and
  the set of strict-contact nodes (obstacle >= continuation + tol), where
  stopping strictly beats continuing;
* a second backward pass over (state, floor) computes
  ``E[ f( (sup of scored obstacle values over the trajectory) v m ) ]`` for
  a grid of floors m, which is the initial value of the smallest dominating
  martingale with floor m (exact when the scored values decrease along the
  scoring family).  ``f`` defaults to identity (budget functional) and can
  be a utility transform.

An optional absorbing trigger level (``barrier``) splits the chain into a
not-hit and a hit layer; layer transitions use per-step Brownian-bridge
crossing probabilities, which are exact for a flat barrier, so the barrier
need not lie on the grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .market import _philox


@dataclass
class LatticeProcessSpec:
    """Driver chain plus obstacle for the Snell oracle.

    ``obstacle(t, levels, hit)`` must return the obstacle value at time
    ``t < horizon`` for an array of driver levels on the given layer;
    ``terminal(levels, hit)`` the terminal obstacle (defaults to zero).
    """

    x0: float
    drift: float
    horizon: float
    n_steps: int
    obstacle: Callable
    terminal: Callable | None = None
    align_level: float | None = None
    barrier: float | None = None
    contact_tol: float = 1e-8
    measure: str = "Qbar"

    def __post_init__(self):
        if self.horizon <= 0:
            raise DomainError("horizon must be > 0")
        if self.n_steps < 2:
            raise DomainError("n_steps must be >= 2")
        if self.align_level is not None and self.align_level == self.x0:
            raise DomainError("align_level must differ from the start level")


class LatticeSolution:
    """Backward-induction results on the lattice."""

    def __init__(self, spec: LatticeProcessSpec):
        self.spec = spec
        self._build_grid()
        self._envelope_pass()

    # ------------------------------------------------------------------ #
    # grid construction
    # ------------------------------------------------------------------ #

    def _choose_dx(self, dx_min):
        """Space step obeying variance feasibility (dx >= dx_min), with the
        special levels sitting exactly on grid nodes.

        The anchor level is always a node and ``x0`` is an integer number of
        steps from it.  When both a scoring line and a barrier are present,
        the step count between x0 and the anchor is searched so the barrier
        also lands (nearly) on a node: node absorption at an aligned barrier
        is what keeps the chain's hitting law clean.
        """
        spec = self.spec
        if spec.align_level is None and spec.barrier is None:
            return dx_min, spec.x0
        anchor = spec.align_level if spec.align_level is not None else spec.barrier
        gap = abs(spec.x0 - anchor)
        if gap == 0.0:
            return dx_min, anchor
        n1_min = max(1, math.floor(gap / dx_min))
        if spec.align_level is None or spec.barrier is None:
            return gap / n1_min, anchor
        # joint alignment: refine dx (and hence the time step) until the
        # barrier also sits close to a node, so node absorption stays exact
        best = None
        span = abs(spec.barrier - anchor)
        for n1 in range(n1_min, n1_min + 13):
            dx = gap / n1
            frac = abs(span / dx - round(span / dx))
            if best is None or frac < best[0] - 1e-12:
                best = (frac, dx)
            if frac < 0.05:
                break
        if best[0] > 0.10:
            warnings.warn(
                f"barrier sits {best[0]:.3f} grid steps off the lattice; "
                "hitting probabilities carry a matching bias", RuntimeWarning)
        return best[1], anchor

    def _build_grid(self):
        spec = self.spec
        nu = spec.drift
        n = spec.n_steps
        dt = spec.horizon / n
        dx_min = math.sqrt(dt * (1.0 + nu * nu * dt))
        dx, anchor = self._choose_dx(dx_min)
        if dx < dx_min * (1 - 1e-12):
            # alignment forces a finer space step; refine time to keep the
            # variance match feasible
            dt_max = dx * dx / (1.0 + nu * nu * dx * dx)
            n = max(n, math.ceil(spec.horizon / dt_max))
            dt = spec.horizon / n
        self.dt, self.dx, self.n_steps = dt, dx, n
        # trinomial probabilities matching mean nu*dt and variance dt exactly
        s = (dt + (nu * dt) ** 2) / (dx * dx)
        d = nu * dt / dx
        self.p_up = 0.5 * (s + d)
        self.p_dn = 0.5 * (s - d)
        self.p_mid = 1.0 - s
        if min(self.p_up, self.p_dn, self.p_mid) < -1e-12:
            raise DomainError("lattice step probabilities out of range; "
                              "increase n_steps")
        k_lo = math.floor((spec.x0 - anchor) / dx) - (n + 1)
        k_hi = math.ceil((spec.x0 - anchor) / dx) + (n + 1)
        self.levels = anchor + dx * np.arange(k_lo, k_hi + 1)
        self.root = int(round((spec.x0 - anchor) / dx)) - k_lo
        self.times = dt * np.arange(n + 1)
        self.layered = spec.barrier is not None
        if self.layered:
            # absorption into the hit layer when a step lands at or above
            # the (grid-aligned) barrier; the half-step snap keeps the node
            # sitting on the barrier absorbed despite rounding
            self._absorb_level = spec.barrier - 0.5 * dx
            r = self.levels
            self.q_up = (np.roll(r, -1) >= self._absorb_level).astype(float)
            self.q_mid = (r >= self._absorb_level).astype(float)
            self.q_dn = (np.roll(r, 1) >= self._absorb_level).astype(float)

    # ------------------------------------------------------------------ #
    # transition operator
    # ------------------------------------------------------------------ #

    @staticmethod
    def _shift(V, k):
        """V evaluated at level index + k, edge-replicated (edges are
        outside the reachable cone)."""
        if k == 0:
            return V
        out = np.empty_like(V)
        if k == 1:
            out[:-1] = V[1:]
            out[-1] = V[-1]
        else:
            out[1:] = V[:-1]
            out[0] = V[0]
        return out

    def _expect(self, V_nohit, V_hit=None):
        """One-step conditional expectation for value arrays indexed by
        (level, ...)."""
        pu, pm, pd = self.p_up, self.p_mid, self.p_dn
        if not self.layered:
            return (pu * self._shift(V_nohit, 1) + pm * V_nohit
                    + pd * self._shift(V_nohit, -1)), None
        exp_hit = (pu * self._shift(V_hit, 1) + pm * V_hit
                   + pd * self._shift(V_hit, -1))

        def mix(q, k):
            q = q.reshape((-1,) + (1,) * (V_nohit.ndim - 1))
            return (1.0 - q) * self._shift(V_nohit, k) + q * self._shift(V_hit, k)

        exp_nohit = pu * mix(self.q_up, 1) + pm * mix(self.q_mid, 0) \
            + pd * mix(self.q_dn, -1)
        return exp_nohit, exp_hit

    def _dead(self, hit: bool):
        """Nodes a path can never occupy: not-hit states at or above the
        absorption level."""
        if self.layered and not hit:
            return self.levels >= self._absorb_level
        return np.zeros(len(self.levels), dtype=bool)

    def _obstacle(self, t, hit):
        vals = np.asarray(self.spec.obstacle(t, self.levels, hit), dtype=float)
        return np.where(self._dead(hit), 0.0, vals)

    def _terminal(self, hit):
        if self.spec.terminal is None:
            return np.zeros_like(self.levels)
        vals = np.asarray(self.spec.terminal(self.levels, hit), dtype=float)
        return np.where(self._dead(hit), 0.0, vals)

    # ------------------------------------------------------------------ #
    # envelope + strict-contact pass
    # ------------------------------------------------------------------ #

    def _envelope_pass(self):
        tol = self.spec.contact_tol
        V = self._terminal(False)
        V_hit = self._terminal(True) if self.layered else None
        contacts = [None] * self.n_steps
        score_max = -np.inf
        for i in range(self.n_steps - 1, -1, -1):
            t = self.times[i]
            cont, cont_hit = self._expect(V, V_hit)
            obs = self._obstacle(t, False)
            mask = obs >= cont + tol
            layer_contacts = [(False, np.nonzero(mask)[0], obs[mask])]
            V = np.maximum(cont, obs)
            if self.layered:
                obs_h = self._obstacle(t, True)
                mask_h = obs_h >= cont_hit + tol
                layer_contacts.append((True, np.nonzero(mask_h)[0], obs_h[mask_h]))
                V_hit = np.maximum(cont_hit, obs_h)
                if mask_h.any():
                    score_max = max(score_max, float(obs_h[mask_h].max()))
            if mask.any():
                score_max = max(score_max, float(obs[mask].max()))
            contacts[i] = layer_contacts
        self._contacts = contacts
        self.envelope0 = float(V[self.root])
        self.envelope_root_profile = V.copy()
        self.max_scored_value = max(score_max,
                                    float(self._terminal(False).max()),
                                    float(self._terminal(True).max())
                                    if self.layered else 0.0)
        self.contact_nodes = int(sum(len(lc[1]) for row in contacts
                                     for lc in row))

    # ------------------------------------------------------------------ #
    # dominating-martingale value E[f(sup scored v m)]
    # ------------------------------------------------------------------ #

    def dominating_curve(self, m_values=None, transform=None, n_grid=641,
                         m_top=None):
        """Initial value of the smallest dominating martingale, as a
        function of the floor m.

        Returns ``(m_grid, values)``; ``m_values`` (if given) are inserted
        into the grid so those floors are evaluated without interpolation.
        ``transform`` is applied to the terminal supremum (default identity).
        """
        top = max(self.max_scored_value, 0.0) * 1.05 + 1e-9
        if m_top is not None:
            top = max(top, float(m_top))
        grid = np.linspace(0.0, max(top, 1e-6), n_grid)
        if m_values is not None:
            grid = np.unique(np.concatenate([grid, np.atleast_1d(
                np.asarray(m_values, dtype=float))]))
        f = transform if transform is not None else (lambda v: v)

        def terminal_layer(hit):
            vals = np.maximum(self._terminal(hit)[:, None], grid[None, :])
            return f(vals)

        G = terminal_layer(False)
        G_hit = terminal_layer(True) if self.layered else None
        for i in range(self.n_steps - 1, -1, -1):
            G, G_hit = self._expect(G, G_hit)
            for hit, idx, vals in self._contacts[i]:
                target = G_hit if hit else G
                self._apply_floor(target, grid, idx, vals)
        curve = G[self.root, :]
        if m_values is None:
            return grid, curve
        return grid, np.interp(np.asarray(m_values, dtype=float), grid, curve)

    @staticmethod
    def _apply_floor(target, grid, idx, vals):
        """Raise the floor argument to the scored value j at contact nodes:
        G(k, m) <- G(k, m v j).  Vectorised across nodes."""
        active = vals > grid[0]
        idx, vals = idx[active], vals[active]
        if len(idx) == 0:
            return
        js = np.minimum(vals, grid[-1])
        pos = np.clip(np.searchsorted(grid, js), 1, len(grid) - 1)
        g_lo, g_hi = grid[pos - 1], grid[pos]
        rows = target[idx, :]
        v_lo = rows[np.arange(len(idx)), pos - 1]
        v_hi = rows[np.arange(len(idx)), pos]
        at_j = v_lo + (js - g_lo) * (v_hi - v_lo) / (g_hi - g_lo)
        target[idx, :] = np.where(grid[None, :] < js[:, None],
                                  at_j[:, None], rows)

    def dominating_value(self, m=0.0, transform=None, n_grid=641):
        """E[f(sup of scored values v m)] at a single floor m."""
        _, vals = self.dominating_curve(m_values=[float(m)],
                                        transform=transform, n_grid=n_grid)
        return float(vals[0])

    # ------------------------------------------------------------------ #
    # forward simulation estimator
    # ------------------------------------------------------------------ #

    def forward_estimate(self, m=0.0, n_paths=100_000, seed=0):
        """Monte Carlo estimate of E[(sup of scored values) v m] by walking
        the chain forward; returns (mean, standard_error)."""
        rng = _philox(seed, spawn_key=(101,))
        k = np.full(n_paths, self.root, dtype=np.int64)
        hit = np.zeros(n_paths, dtype=bool)
        run_max = np.full(n_paths, -np.inf)
        # contact lookup tables per step
        for i in range(self.n_steps):
            for is_hit, idx, vals in self._contacts[i]:
                if len(idx) == 0:
                    continue
                table = np.full(len(self.levels), -np.inf)
                table[idx] = vals
                sel = hit == is_hit
                if sel.any():
                    run_max[sel] = np.maximum(run_max[sel], table[k[sel]])
            u = rng.random(n_paths)
            step = np.where(u < self.p_up, 1,
                            np.where(u < self.p_up + self.p_mid, 0, -1))
            if self.layered:
                q = np.where(step == 1, self.q_up[k],
                             np.where(step == 0, self.q_mid[k], self.q_dn[k]))
                hit |= rng.random(n_paths) < q
            k = k + step
        term = np.where(hit, self._terminal(True)[k], self._terminal(False)[k]) \
            if self.layered else self._terminal(False)[k]
        vals = np.maximum(np.maximum(run_max, term), float(m))
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_paths))


def snell_lattice(spec: LatticeProcessSpec) -> LatticeSolution:
    """Solve the lattice: Snell envelope, strict-contact set, and the
    dominating-martingale functionals."""
    return LatticeSolution(spec)
