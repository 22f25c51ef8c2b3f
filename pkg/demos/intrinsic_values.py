"""Worst-case (intrinsic) valuation of option portfolios.

A long call is worth its zero-volatility payoff in the worst case; a short
call marks like a short asset; a butterfly marks at zero before maturity.
The greatest convex minorant is what turns a payoff into its worst-case
mark, and with nonzero rates the mark rides the forward.
"""

import numpy as np

from intrinsicopt import (MarketParams, PiecewisePayoff, convex_minorant,
                          intrinsic_european)

m = MarketParams.from_theta(s0=1.2, theta=0.05, r=0.01, sigma=0.5, T=2.0,
                            p=0.75)

print("== greatest convex minorants ==")
for label, payoff in [
    ("long call K=0.85", PiecewisePayoff.call(0.85)),
    ("short call K=0.85", PiecewisePayoff.call(0.85).scaled(-1.0)),
    ("butterfly 0.8/1.0/1.3", PiecewisePayoff.from_legs(
        calls=[(0.8, 0.6), (1.0, -1.0), (1.3, 0.4)])),
]:
    g = convex_minorant(payoff)
    xs = np.array([0.0, 0.5, 0.85, 1.0, 1.3, 2.0])
    print(f"{label:24s} payoff {np.round(payoff(xs), 4)}")
    print(f"{'':24s} minorant {np.round(g(xs), 4)}")

print("\n== intrinsic value through time (long call, s fixed at 1.1) ==")
h = PiecewisePayoff.call(0.85)
for t in (0.0, 1.0, 1.99, 2.0):
    print(f"  t={t:4.2f}: In_t = {intrinsic_european(m, h, t, 1.1):.6f}")
print("with r > 0 the pre-maturity mark uses the forward-adjusted spot;"
      " at t = T it is the raw payoff")
