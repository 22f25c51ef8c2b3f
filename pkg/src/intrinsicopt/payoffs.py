"""European payoff portfolios and their worst-case (intrinsic) values.

Payoffs are continuous piecewise-linear functions on [0, inf): call
portfolios plus linear asset/cash positions.  For such payoffs the greatest
convex minorant is exact (lower convex hull of the breakpoints plus a
recession-slope cap), and the pre-maturity intrinsic value of ``h(S_T)`` is

    In_t(h) = D_t^{-1} D_T h*( D_T^{-1} D_t s ),   t < T,

with terminal value ``h(s)`` at ``t = T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .market import MarketParams


# ---------------------------------------------------------------------- #
# piecewise-linear payoffs
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class PiecewisePayoff:
    """Continuous piecewise-linear payoff on [0, inf).

    ``breakpoints`` are strictly ascending strikes (> 0); the function is
    linear from ``(0, left_value)`` through the breakpoint values and has
    slope ``terminal_slope`` beyond the last breakpoint.  A breakpoint at 0
    is folded into ``left_value`` on construction.
    """

    breakpoints: tuple = ()
    values: tuple = ()
    left_value: float = 0.0
    terminal_slope: float = 0.0

    def __post_init__(self):
        ks = tuple(float(k) for k in self.breakpoints)
        vs = tuple(float(v) for v in self.values)
        if len(ks) != len(vs):
            raise DomainError("breakpoints and values must have equal length")
        if any(k < 0 for k in ks):
            raise DomainError("breakpoints must be >= 0")
        if any(later <= earlier for later, earlier in zip(ks[1:], ks[:-1])):
            raise DomainError("breakpoints must be strictly ascending")
        if ks and ks[0] == 0.0:
            if abs(vs[0] - self.left_value) > 0:
                object.__setattr__(self, "left_value", vs[0])
            ks, vs = ks[1:], vs[1:]
        object.__setattr__(self, "breakpoints", ks)
        object.__setattr__(self, "values", vs)
        object.__setattr__(self, "left_value", float(self.left_value))
        object.__setattr__(self, "terminal_slope", float(self.terminal_slope))

    # -- construction helpers ------------------------------------------ #

    @classmethod
    def from_legs(cls, calls=(), asset: float = 0.0, cash: float = 0.0) -> "PiecewisePayoff":
        """Build from (strike, quantity) call legs plus asset and cash legs.

        Zero-strike calls are equivalent to asset legs and are folded in.
        """
        qty_by_k: dict[float, float] = {}
        asset = float(asset)
        for K, a in calls:
            K, a = float(K), float(a)
            if K < 0:
                raise DomainError("call strikes must be >= 0")
            if K == 0.0:
                asset += a
            else:
                qty_by_k[K] = qty_by_k.get(K, 0.0) + a
        ks = sorted(k for k, a in qty_by_k.items() if a != 0.0)
        values, slope, level, prev = [], asset, float(cash), 0.0
        for k in ks:
            level += slope * (k - prev)
            values.append(level)
            slope += qty_by_k[k]
            prev = k
        return cls(breakpoints=tuple(ks), values=tuple(values),
                   left_value=cash, terminal_slope=slope)

    @classmethod
    def call(cls, K: float) -> "PiecewisePayoff":
        return cls.from_legs(calls=[(K, 1.0)])

    # -- evaluation ----------------------------------------------------- #

    def _vertices(self):
        xs = (0.0,) + self.breakpoints
        ys = (self.left_value,) + self.values
        return np.asarray(xs), np.asarray(ys)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr < 0):
            raise DomainError("payoffs are defined on [0, inf)")
        xs, ys = self._vertices()
        out = np.interp(x_arr, xs, ys)
        tail = x_arr > xs[-1]
        out = np.where(tail, ys[-1] + self.terminal_slope * (x_arr - xs[-1]), out)
        return float(out) if out.ndim == 0 else out

    def scaled(self, c: float) -> "PiecewisePayoff":
        return PiecewisePayoff(self.breakpoints, tuple(c * v for v in self.values),
                               c * self.left_value, c * self.terminal_slope)

    def minimum(self) -> float:
        """inf of the payoff over [0, inf); -inf if the recession slope < 0
        makes it unbounded below."""
        xs, ys = self._vertices()
        if self.terminal_slope < 0:
            return -np.inf
        return float(np.min(ys))


def convex_minorant(h: PiecewisePayoff) -> PiecewisePayoff:
    """Greatest convex minorant of ``h`` on [0, inf).

    Lower convex hull of the vertices (0, left_value), (k_i, v_i), with the
    recession direction capped at ``terminal_slope``: hull vertices whose
    outgoing edge would exceed the terminal slope are dropped and the
    minorant continues with the terminal slope from the surviving vertex.
    Ties in the hull construction keep the lower value.
    """
    xs, ys = h._vertices()
    hull: list[tuple[float, float]] = []
    for x, y in zip(xs, ys):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep hull turning left: slope(x1,x2) <= slope(x2,x)
            if (y2 - y1) * (x - x2) >= (y - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        if hull and hull[-1][0] == x:
            if y < hull[-1][1]:
                hull[-1] = (x, y)
        else:
            hull.append((x, y))
    # cap by the recession slope
    while len(hull) >= 2:
        (x1, y1), (x2, y2) = hull[-2], hull[-1]
        if (y2 - y1) > h.terminal_slope * (x2 - x1):
            hull.pop()
        else:
            break
    hx = tuple(x for x, _ in hull)
    hy = tuple(y for _, y in hull)
    return PiecewisePayoff(breakpoints=hx[1:], values=hy[1:], left_value=hy[0],
                           terminal_slope=h.terminal_slope)


# ---------------------------------------------------------------------- #
# intrinsic values
# ---------------------------------------------------------------------- #

def intrinsic_european(m: MarketParams, h: PiecewisePayoff, t: float, s: float) -> float:
    """Worst-case value at time t of a European payoff h(S_T).

    Pre-maturity this is ``D_t^{-1} D_T h*(D_T^{-1} D_t s)`` with h* the
    greatest convex minorant; at ``t = T`` it is ``h(s)`` exactly.
    """
    if not (0 <= t <= m.T):
        raise DomainError("t must lie in [0, T]")
    if s < 0:
        raise DomainError("spot must be >= 0")
    if t == m.T:
        return float(h(s))
    hstar = convex_minorant(h)
    dt, dT = m.discount(t), m.discount(m.T)
    return dT / dt * float(hstar(s * dt / dT))


@dataclass(frozen=True)
class OneTouchState:
    """Barrier-hit bookkeeping for a one-touch position."""

    barrier: float
    hit: bool = False
    hit_time: float | None = None

    def __post_init__(self):
        if self.barrier <= 0:
            raise DomainError("barrier must be > 0")
        if self.hit and self.hit_time is not None and self.hit_time < 0:
            raise DomainError("hit_time must be >= 0")


def intrinsic_onetouch(sign: str, state: OneTouchState, t: float, s: float,
                       T: float) -> float:
    """Worst-case value of a one-touch position paying 1_{S* >= B} at T
    (zero-rate convention of the underlying example).

    Long: the indicator of the barrier having been hit.  Short: -s/B before
    the hit (for t < T), -1 after the hit, and the terminal payoff at t = T.
    """
    if s < 0:
        raise DomainError("spot must be >= 0")
    if sign not in ("long", "short"):
        raise DomainError("sign must be 'long' or 'short'")
    hit = state.hit or s >= state.barrier
    if sign == "long":
        return 1.0 if hit else 0.0
    if hit:
        return -1.0
    return -s / state.barrier if t < T else 0.0


def intrinsic_hobson_package(m: MarketParams, t: float, s: float,
                             state: OneTouchState, K: float, B: float) -> float:
    """Discounted intrinsic value D_t * In_t of the one-touch superhedge
    package (1/(B-K) calls at K, barrier-triggered forward, short one-touch).

    Zero before the barrier is hit; ``(K^D - s D_t)_+ / (B - K)`` afterwards.
    """
    if not (0 < K < B):
        raise DomainError("hedge strike must satisfy 0 < K < B")
    if not (0 <= t <= m.T):
        raise DomainError("t must lie in [0, T]")
    if s < 0:
        raise DomainError("spot must be >= 0")
    if not state.hit:
        return 0.0
    Kd = m.discounted_strike(K)
    return max(Kd - s * m.discount(t), 0.0) / (B - K)
