"""Black-Scholes pricing primitives, expected local time, and the
constraint index z.

Conventions
-----------
* ``norm_cdf`` is evaluated through the complementary error function
  (absolute error ~1e-16); tail accuracy matters because z-root locations
  feed the binding horizon r* and the budget equation.
* In the expected-local-time formula the log-moneyness numerator uses the
  standard ``sigma^2 (T-t)/2`` term, which reproduces the at-the-money
  identity ``Kd (2 Phi(sigma sqrt(tau)/2) - 1)`` exactly.
* The at-the-money-forward call value is ``K D (2 Phi(sigma sqrt(tau)/2) - 1)``,
  which is what the Black-Scholes formula forces (positive).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError
from .market import MarketParams


def norm_cdf(x):
    """Standard normal CDF via erfc; vectorised."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CallQuote:
    """A market call quote at a common maturity."""

    strike: float
    maturity: float
    price: float

    def __post_init__(self):
        if self.strike < 0:
            raise DomainError("strike must be >= 0")
        if not np.isfinite(self.price):
            raise DomainError("price must be finite")


# ---------------------------------------------------------------------- #
# vanilla prices
# ---------------------------------------------------------------------- #

def bs_call(s, K, tau, sigma, r=0.0):
    """Black-Scholes call value; returns (s-K)_+ at tau = 0.

    Vectorised over ``s`` and ``K``.
    """
    s = np.asarray(s, dtype=float)
    K = np.asarray(K, dtype=float)
    if np.any(s < 0) or np.any(K < 0):
        raise DomainError("spot and strike must be >= 0")
    if tau < 0:
        raise DomainError("time to maturity must be >= 0")
    if sigma <= 0:
        raise DomainError("sigma must be > 0")
    s, K = np.broadcast_arrays(s, K)
    out = np.empty(s.shape)
    if tau == 0.0:
        out[...] = np.maximum(s - K, 0.0)
    else:
        df = np.exp(-r * tau)
        sq = sigma * np.sqrt(tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            d1 = (np.log(s / K) + (r + 0.5 * sigma**2) * tau) / sq
        d2 = d1 - sq
        degenerate = (s == 0.0) | (K == 0.0)
        out[...] = np.where(degenerate, np.maximum(s - K * df, 0.0),
                            np.where(np.isnan(d1), 0.0,
                                     s * ndtr(np.nan_to_num(d1))
                                     - K * df * ndtr(np.nan_to_num(d2))))
    return float(out) if out.ndim == 0 else out


def bs_put(s, K, tau, sigma, r=0.0):
    """Black-Scholes put via put-call parity: P = C - s + K e^{-r tau}."""
    return bs_call(s, K, tau, sigma, r) - np.asarray(s, dtype=float) \
        + np.asarray(K, dtype=float) * np.exp(-r * tau)


def atm_forward_call(Kd, tau, sigma):
    """Call struck and spotted at the discounted strike:
    Kd * (2 Phi(sigma sqrt(tau)/2) - 1)."""
    return Kd * (2.0 * norm_cdf(0.5 * sigma * np.sqrt(tau)) - 1.0)


# ---------------------------------------------------------------------- #
# expected local time and the constraint index
# ---------------------------------------------------------------------- #

def expected_local_time(sd, Kd, tau, sigma):
    """E_Q[L_T - L_t | F_t] of the discounted price at the discounted strike.

    Equals the time value of the zero-rate call on the discounted price:
    ``Phi(d1) sd - Phi(d1 - sigma sqrt(tau)) Kd - (sd - Kd)_+`` with
    ``d1 = (log(sd/Kd) + sigma^2 tau / 2) / (sigma sqrt(tau))``.
    Nonnegative; -> 0 as tau -> 0.
    """
    sd = np.asarray(sd, dtype=float)
    if np.any(sd <= 0) or Kd <= 0:
        raise DomainError("sd and Kd must be > 0")
    if tau < 0:
        raise DomainError("tau must be >= 0")
    value = bs_call(sd, Kd, tau, sigma, r=0.0) - np.maximum(sd - Kd, 0.0)
    return np.maximum(value, 0.0) if not np.isscalar(value) else max(value, 0.0)


def rho(m: MarketParams, t, Kd: float):
    """Additional hedging cost rho(t) = phi(t) * Kd * (2 Phi(sigma sqrt(T-t)/2) - 1)
    held on the strike line; positive for t < T, zero at T."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > m.T * (1 + 1e-12)):
        raise DomainError("t must lie in [0, T]")
    out = m.phi_on_strike_line(t_arr, Kd) * atm_forward_call(
        Kd, np.maximum(m.T - t_arr, 0.0), m.sigma)
    return float(out) if np.isscalar(t) else out


def z(m: MarketParams, u, lam: float, Kd: float, alpha: float | None = None):
    """Constraint index z(u; lambda) = lambda * rho(u) - alpha * phi(u).

    The value scored when the discounted price first returns to the
    discounted strike; strictly decreasing in u when theta > 0 and
    p*sigma > theta; z(T) = -alpha * phi(T).
    """
    if lam < 0:
        raise DomainError("lambda must be >= 0")
    alpha = m.alpha if alpha is None else alpha
    u_arr = np.asarray(u, dtype=float)
    out = lam * rho(m, u_arr, Kd) - alpha * m.phi_on_strike_line(u_arr, Kd)
    return float(out) if np.isscalar(u) else out
