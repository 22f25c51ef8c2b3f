"""Static-consistency audit of a call price curve.

Model-generated quotes pass clean; a bumped quote is flagged with the
witnessing strikes, and the constructed portfolio banks the mispricing
while its worst-case wealth is certified nonnegative by the convex-minorant
calculus, without touching the floor allowance.
"""

import numpy as np

from intrinsicopt import (CallCurve, MarketParams, bs_curve,
                          call_admissibility, check_consistency,
                          construct_arbitrage, critical_strikes)
from intrinsicopt.pricing import bs_call

m = MarketParams.from_theta(s0=1.2, theta=0.05, r=0.01, sigma=0.5, T=2.0,
                            p=0.75, w0=0.3, alpha=0.2)
strikes = np.array([0.0, 0.4, 0.7, 0.95, 1.2, 1.5, 1.9, 2.4])
dT = m.discount(m.T)

clean = bs_curve(m, strikes)
print("model curve:", "clean" if check_consistency(clean, dT=dT).clean
      else "violations?!")

prices = clean.prices.copy()
prices[4] += 0.02
bad = CallCurve.from_arrays(strikes, prices, m.s0, m.T)
report = check_consistency(bad, dT=dT)
for v in report.violations:
    port = construct_arbitrage(bad, v, dT=dT)
    print(f"{v.kind}: {v.detail}")
    print(f"  legs {port.call_legs} asset {port.asset_qty:+g}")
    print(f"  {port.certificate}")

print("\n== single-call admissibility ==")
k_plus, k_minus = critical_strikes(m)
print(f"critical strikes on budget w0+alpha={m.w0 + m.alpha}: "
      f"K+ = {k_plus:.3f} (long), K- = {k_minus:.3f} (short)")
for K in (0.5, k_plus * 0.99, k_plus * 1.2):
    fair = float(bs_call(m.s0, K, m.T, m.sigma, m.r))
    d = call_admissibility(m, "long", K, fair)
    print(f"  long K={K:5.3f} at fair price: "
          f"{'pass' if d.passes else 'fail'} (slack {d.slack:+.4f})")
