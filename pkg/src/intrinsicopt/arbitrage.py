"""Static-consistency auditing of call price curves, with constructive
arbitrage certificates, and admissibility of single-call positions.

A discrete curve of call quotes at a common maturity is checked against
the five classical conditions (convexity, monotonicity, the zero-strike
anchor C(0) = S0, the initial slope bound C'(0) >= -D_T, nonnegativity);
each failure yields an explicit portfolio whose worst-case (intrinsic)
wealth is certified nonnegative by the convex-minorant calculus while
banking a strictly positive credit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .market import MarketParams
from .payoffs import PiecewisePayoff, convex_minorant
from .pricing import CallQuote, atm_forward_call, bs_call, norm_cdf


# ---------------------------------------------------------------------- #
# curves and audit results
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class CallCurve:
    """Ascending-strike call quotes at a common maturity plus the spot."""

    quotes: tuple
    s0: float

    def __post_init__(self):
        if len(self.quotes) == 0:
            raise DomainError("curve needs at least one quote")
        ks = [q.strike for q in self.quotes]
        if any(later <= earlier for later, earlier in zip(ks[1:], ks[:-1])):
            raise DomainError("strikes must be strictly ascending")
        if self.s0 <= 0:
            raise DomainError("s0 must be > 0")

    @classmethod
    def from_arrays(cls, strikes, prices, s0, maturity) -> "CallCurve":
        quotes = tuple(CallQuote(strike=float(k), maturity=float(maturity),
                                 price=float(c))
                       for k, c in zip(strikes, prices))
        return cls(quotes=quotes, s0=float(s0))

    @property
    def strikes(self):
        return np.array([q.strike for q in self.quotes])

    @property
    def prices(self):
        return np.array([q.price for q in self.quotes])

    def price_at(self, K: float) -> float:
        idx = np.nonzero(self.strikes == K)[0]
        if len(idx) == 0:
            raise DomainError(f"no quote at strike {K}")
        return float(self.prices[idx[0]])


def bs_curve(m: MarketParams, strikes) -> CallCurve:
    """Model-consistent curve of Black-Scholes prices (audit fixture)."""
    prices = bs_call(m.s0, np.asarray(strikes, dtype=float), m.T, m.sigma, m.r)
    return CallCurve.from_arrays(strikes, np.atleast_1d(prices), m.s0, m.T)


@dataclass(frozen=True)
class Violation:
    """One failed consistency condition with its witnessing strikes."""

    kind: str            # convexity | monotonicity | spot_anchor | slope | nonnegativity
    strikes: tuple
    detail: str


@dataclass(frozen=True)
class ConsistencyReport:
    violations: tuple
    not_checkable: tuple

    @property
    def clean(self) -> bool:
        return len(self.violations) == 0


def check_consistency(curve: CallCurve, dT: float = 1.0,
                      tol: float = 0.0) -> ConsistencyReport:
    """Audit the five discrete conditions on the quoted strikes.

    The anchor and slope conditions need a zero-strike quote and are
    reported as not checkable without one.  ``dT`` is the maturity discount
    factor entering the slope bound.
    """
    ks, cs = curve.strikes, curve.prices
    violations = []
    not_checkable = []
    for k, c in zip(ks, cs):
        if c < -tol:
            violations.append(Violation("nonnegativity", (float(k),),
                                        f"C({k:g}) = {c:g} < 0"))
    for i in range(len(ks) - 1):
        if cs[i + 1] - cs[i] > tol:
            violations.append(Violation(
                "monotonicity", (float(ks[i]), float(ks[i + 1])),
                f"C({ks[i]:g}) = {cs[i]:g} < C({ks[i+1]:g}) = {cs[i+1]:g}"))
    for i in range(1, len(ks) - 1):
        k1, k2, k3 = ks[i - 1], ks[i], ks[i + 1]
        lam = (k3 - k2) / (k3 - k1)
        chord = lam * cs[i - 1] + (1.0 - lam) * cs[i + 1]
        if cs[i] - chord > tol:
            violations.append(Violation(
                "convexity", (float(k1), float(k2), float(k3)),
                f"C({k2:g}) = {cs[i]:g} above chord {chord:g}"))
    if ks[0] == 0.0:
        if abs(cs[0] - curve.s0) > tol:
            violations.append(Violation(
                "spot_anchor", (0.0,),
                f"C(0) = {cs[0]:g} != s0 = {curve.s0:g}"))
        if len(ks) > 1:
            slope = (cs[1] - cs[0]) / (ks[1] - ks[0])
            if slope < -dT - tol:
                violations.append(Violation(
                    "slope", (0.0, float(ks[1])),
                    f"right slope at 0 is {slope:g} < -D_T = {-dT:g}"))
        else:
            not_checkable.append("slope")
    else:
        not_checkable.extend(["spot_anchor", "slope"])
    return ConsistencyReport(tuple(violations), tuple(not_checkable))


# ---------------------------------------------------------------------- #
# constructive certificates
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class ArbPortfolio:
    """Scalable static portfolio banking ``epsilon`` of initial credit with
    an intrinsic-wealth floor certified nonnegative.

    ``wealth_floor`` = cash_credit + D_T * inf h*, where h is the combined
    static payoff (call legs plus asset leg) and h* its convex minorant;
    the time-t intrinsic wealth is bounded below by wealth_floor / D_t.
    """

    kind: str
    call_legs: tuple
    asset_qty: float
    cash_credit: float
    epsilon: float
    wealth_floor: float
    certificate: str

    def payoff(self) -> PiecewisePayoff:
        return PiecewisePayoff.from_legs(calls=self.call_legs,
                                         asset=self.asset_qty)

    def scaled(self, c: float) -> "ArbPortfolio":
        if c <= 0:
            raise DomainError("scale must be > 0")
        return ArbPortfolio(
            kind=self.kind,
            call_legs=tuple((k, c * q) for k, q in self.call_legs),
            asset_qty=c * self.asset_qty, cash_credit=c * self.cash_credit,
            epsilon=c * self.epsilon, wealth_floor=c * self.wealth_floor,
            certificate=self.certificate + f" [scaled x{c:g}]")


def _certified(kind, legs, asset, credit, dT, note) -> ArbPortfolio:
    payoff = PiecewisePayoff.from_legs(calls=legs, asset=asset)
    floor_of_minorant = convex_minorant(payoff).minimum()
    wealth_floor = credit + dT * floor_of_minorant
    certificate = (f"{note}; credit = {credit:.6g}, "
                   f"inf h* = {floor_of_minorant:.6g}, "
                   f"intrinsic wealth floor = {wealth_floor:.6g} >= 0")
    return ArbPortfolio(kind=kind, call_legs=tuple(legs), asset_qty=asset,
                        cash_credit=credit, epsilon=credit,
                        wealth_floor=wealth_floor, certificate=certificate)


def construct_arbitrage(curve: CallCurve, violation: Violation,
                        dT: float = 1.0) -> ArbPortfolio:
    """Explicit arbitrage portfolio for a reported violation."""
    kind = violation.kind
    if kind == "convexity":
        k1, k2, k3 = violation.strikes
        lam = (k3 - k2) / (k3 - k1)
        credit = (curve.price_at(k2) - lam * curve.price_at(k1)
                  - (1.0 - lam) * curve.price_at(k3))
        return _certified(kind, [(k1, lam), (k2, -1.0), (k3, 1.0 - lam)],
                          0.0, credit, dT,
                          f"butterfly ({lam:.4g}, -1, {1-lam:.4g}) at "
                          f"strikes ({k1:g}, {k2:g}, {k3:g})")
    if kind == "monotonicity":
        k1, k2 = violation.strikes
        credit = curve.price_at(k2) - curve.price_at(k1)
        return _certified(kind, [(k1, 1.0), (k2, -1.0)], 0.0, credit, dT,
                          f"call spread long {k1:g} short {k2:g}")
    if kind == "spot_anchor":
        c0 = curve.price_at(0.0)
        if c0 < curve.s0:
            return _certified(kind, [(0.0, 1.0)], -1.0, curve.s0 - c0, dT,
                              "long zero-strike call, short asset")
        return _certified(kind, [(0.0, -1.0)], 1.0, c0 - curve.s0, dT,
                          "short zero-strike call, long asset")
    if kind == "slope":
        k1 = violation.strikes[1]
        credit = curve.s0 - curve.price_at(k1)
        port = _certified(kind, [(k1, 1.0)], -1.0, credit, dT,
                          f"long call at {k1:g}, short asset")
        # epsilon is the net credit after the floor -D_T*K of the minorant
        return ArbPortfolio(kind=port.kind, call_legs=port.call_legs,
                            asset_qty=port.asset_qty,
                            cash_credit=port.cash_credit,
                            epsilon=port.wealth_floor,
                            wealth_floor=port.wealth_floor,
                            certificate=port.certificate)
    if kind == "nonnegativity":
        kbar = violation.strikes[0]
        credit = -curve.price_at(kbar)
        return _certified(kind, [(kbar, 1.0)], 0.0, credit, dT,
                          f"buy the negatively priced call at {kbar:g}")
    raise DomainError(f"unknown violation kind {kind!r}")


# ---------------------------------------------------------------------- #
# admissibility of single-call positions
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class AdmissibilityDecision:
    direction: str
    strike: float
    delta_c: float
    slack: float

    @property
    def passes(self) -> bool:
        return self.slack >= 0


def call_admissibility(m: MarketParams, direction: str, K: float,
                       c0: float) -> AdmissibilityDecision:
    """Delta-hedged single-call admissibility under the intrinsic floor.

    Long:  w0 + DeltaC >= atm_forward_call(K D_T) - alpha.
    Short: w0 + alpha - DeltaC >= K D_T.
    ``slack`` is left minus right; the position is admissible iff slack >= 0.
    """
    if K <= 0:
        raise DomainError("strike must be > 0")
    delta_c = float(bs_call(m.s0, K, m.T, m.sigma, m.r)) - c0
    if direction == "long":
        slack = m.w0 + delta_c + m.alpha - atm_forward_call(
            m.discounted_strike(K), m.T, m.sigma)
    elif direction == "short":
        slack = m.w0 + m.alpha - delta_c - m.discounted_strike(K)
    else:
        raise DomainError("direction must be 'long' or 'short'")
    return AdmissibilityDecision(direction=direction, strike=K,
                                 delta_c=delta_c, slack=float(slack))


def critical_strikes(m: MarketParams, w0: float | None = None,
                     alpha: float | None = None) -> tuple[float, float]:
    """(K_plus, K_minus): largest strikes for which a fairly priced long
    (resp. short) delta-hedged call stays admissible on budget w0 + alpha."""
    w0 = m.w0 if w0 is None else w0
    alpha = m.alpha if alpha is None else alpha
    budget = w0 + alpha
    if budget <= 0:
        raise DomainError("w0 + alpha must be > 0")
    dT = m.discount(m.T)
    factor = 2.0 * norm_cdf(0.5 * m.sigma * math.sqrt(m.T)) - 1.0
    k_plus = budget / (dT * factor)
    k_minus = budget / dT
    return k_plus, k_minus
