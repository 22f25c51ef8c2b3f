"""Black-Scholes-Merton market model, pricing kernel and measure changes.

The engine works throughout in the driver coordinate

    R_t := log(S_t^D) / sigma,          S_t^D := D_t S_t,

in which the discounted price is ``S^D = exp(sigma * R)`` and every level
set ``S^D = const`` is a flat line.  Under each of the three measures the
driver is a unit-volatility Brownian motion with constant drift::

    measure   driver drift      line slope beta = -drift
    Q         -sigma/2          sigma/2
    Qbar      -(sigma/2 - theta/p)   sigma/2 - theta/p
    P         -(sigma/2 - theta)     sigma/2 - theta

so first-passage questions about ``S^D`` reduce to Brownian motion against
a linear boundary with the slopes above (see :mod:`intrinsicopt.passage`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


class Measure(str, enum.Enum):
    """Probability measure tag: real-world P, risk-neutral Q, or the
    power-utility tilted Qbar."""

    P = "P"
    Q = "Q"
    QBAR = "Qbar"

    @classmethod
    def parse(cls, value) -> "Measure":
        if isinstance(value, Measure):
            return value
        for m in cls:
            if str(value).lower() == m.value.lower():
                return m
        raise DomainError(f"unknown measure tag {value!r}; expected one of P, Q, Qbar")


@dataclass(frozen=True)
class MarketParams:
    """Market and preference parameters.

    Parameters
    ----------
    s0 : float
        Initial asset price, > 0.
    mu : float
        Real-world drift of the asset.
    r : float
        Deterministic interest rate, >= 0.
    sigma : float
        Volatility, > 0.
    T : float
        Horizon, > 0.
    p : float
        Relative risk aversion of the power utility x^(1-p)/(1-p), in (0, 1).
    w0 : float
        Initial wealth, >= 0.
    alpha : float
        Constraint level: intrinsic wealth must stay above -alpha, >= 0.
    """

    s0: float
    mu: float
    r: float
    sigma: float
    T: float
    p: float
    w0: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.s0 > 0):
            raise DomainError("s0 must be > 0")
        if not (self.sigma > 0):
            raise DomainError("sigma must be > 0")
        if not (self.T > 0):
            raise DomainError("T must be > 0")
        if not (0 < self.p < 1):
            raise DomainError("p must lie in (0, 1)")
        if self.r < 0:
            raise DomainError("r must be >= 0")
        if self.w0 < 0:
            raise DomainError("w0 must be >= 0")
        if self.alpha < 0:
            raise DomainError("alpha must be >= 0")
        if not math.isfinite(self.theta):
            raise DomainError("theta = (mu - r)/sigma is not finite")

    @classmethod
    def from_theta(cls, s0, theta, r, sigma, T, p, w0=0.0, alpha=0.0) -> "MarketParams":
        """Construct with the Sharpe ratio given instead of the drift."""
        return cls(s0=s0, mu=r + sigma * theta, r=r, sigma=sigma, T=T, p=p,
                   w0=w0, alpha=alpha)

    # ------------------------------------------------------------------ #
    # derived quantities
    # ------------------------------------------------------------------ #

    @property
    def theta(self) -> float:
        """Sharpe ratio (mu - r) / sigma."""
        return (self.mu - self.r) / self.sigma

    @property
    def z_decreasing(self) -> bool:
        """True iff theta > 0 and p*sigma > theta, the regime in which the
        constraint index z(u) is strictly decreasing and the closed-form
        solver applies."""
        return self.theta > 0 and self.p * self.sigma > self.theta

    @property
    def x0(self) -> float:
        """Driver start level log(s0)/sigma."""
        return math.log(self.s0) / self.sigma

    def discount(self, t) -> float:
        """Discount factor D_t = exp(-r t) for t in [0, T]."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.T * (1 + 1e-12)):
            raise DomainError(f"t must lie in [0, T={self.T}]")
        out = np.exp(-self.r * t_arr)
        return float(out) if np.isscalar(t) or out.ndim == 0 else out

    def discounted_strike(self, K: float) -> float:
        """K^D = K * D_T."""
        return K * self.discount(self.T)

    def level_of(self, discounted_price: float) -> float:
        """Driver level log(x)/sigma of a discounted price level x."""
        if discounted_price <= 0:
            raise DomainError("discounted price level must be > 0")
        return math.log(discounted_price) / self.sigma

    def spd_moment(self, q: float) -> float:
        """E_P[H_T^q] for the state-price density
        H_t = exp(-theta*B_t - (theta^2/2 + r)t); lognormal, exists for all q."""
        th = self.theta
        return math.exp(0.5 * q * q * th * th * self.T
                        - q * (0.5 * th * th + self.r) * self.T)

    def cp_constant(self) -> float:
        """c_p = (E_P[H_T^(1-1/p)])^p, the utility scale factor that maps the
        tilted-measure objective back to P-expected utility."""
        return self.spd_moment(1.0 - 1.0 / self.p) ** self.p

    # ------------------------------------------------------------------ #
    # measure mapping and the phi process
    # ------------------------------------------------------------------ #

    def line_slope(self, measure) -> float:
        """Slope beta of the equivalent linear boundary for the given measure.

        The driver R satisfies R_t = x0 + B^W_t - beta*t, so ``S^D`` touching
        a fixed level is Brownian motion meeting the line ``y + beta*t``.
        """
        measure = Measure.parse(measure)
        if measure is Measure.Q:
            return 0.5 * self.sigma
        if measure is Measure.QBAR:
            return 0.5 * self.sigma - self.theta / self.p
        return 0.5 * self.sigma - self.theta

    def phi_state(self, t, level):
        """phi_t = (D_t xi_t)^{-1} as a function of time and driver level.

        ``level`` is R_t = log(S_t^D)/sigma.  Vectorised over both arguments.
        """
        th_p = self.theta / self.p
        level = np.asarray(level, dtype=float)
        out = np.exp(-th_p * (level - self.x0 + 0.5 * self.sigma * np.asarray(t))
                     + 0.5 * th_p * th_p * np.asarray(t))
        return float(out) if out.ndim == 0 else out

    def phi_on_strike_line(self, t, Kd):
        """phi evaluated on the line S_t^D = K^D:
        (s0/K^D)^(theta/(sigma p)) * exp{ theta (theta - sigma p) t / (2 p^2) }.

        Decreasing in t iff theta > 0 and p*sigma > theta.
        """
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.T * (1 + 1e-12)):
            raise DomainError("t must lie in [0, T]")
        if Kd <= 0:
            raise DomainError("discounted strike must be > 0")
        out = self.phi_state(t_arr, self.level_of(Kd))
        return float(out) if np.isscalar(t) else out


# ---------------------------------------------------------------------- #
# path simulation
# ---------------------------------------------------------------------- #

def _philox(seed: int, spawn_key=()) -> np.random.Generator:
    """Counter-based generator; child streams keyed by ``spawn_key`` so each
    chunk's stream is independent of how work is scheduled."""
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(spawn_key))))


def simulate_paths(m: MarketParams, measure, n_paths: int, n_steps: int,
                   seed: int, horizon: float | None = None):
    """Exact Gaussian-increment paths of the measure's Brownian driver.

    Returns ``(grid, paths)`` with ``paths[i, k] = x0 + B^W_{t_k}`` for the
    chosen measure's Brownian motion B^W, on the uniform grid ``grid`` over
    [0, horizon].  No drift is included: all drift sits in the boundary slope
    ``line_slope(measure)``.  Deterministic for a fixed seed.
    """
    Measure.parse(measure)
    if n_paths < 1 or n_steps < 1:
        raise DomainError("n_paths and n_steps must be >= 1")
    horizon = m.T if horizon is None else float(horizon)
    grid = np.linspace(0.0, horizon, n_steps + 1)
    dt = horizon / n_steps
    rng = _philox(seed)
    incs = rng.standard_normal((n_paths, n_steps)) * math.sqrt(dt)
    paths = np.empty((n_paths, n_steps + 1))
    paths[:, 0] = m.x0
    np.cumsum(incs, axis=1, out=paths[:, 1:])
    paths[:, 1:] += m.x0
    return grid, paths


def driver_levels(m: MarketParams, measure, grid, paths):
    """Convert raw driver paths x0 + B^W into R_t = log(S^D_t)/sigma."""
    return paths - m.line_slope(measure) * np.asarray(grid)


def discounted_prices(m: MarketParams, measure, grid, paths):
    """Discounted price paths S^D_t implied by simulated driver paths."""
    return np.exp(m.sigma * driver_levels(m, measure, grid, paths))
