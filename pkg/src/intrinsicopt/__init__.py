"""Utility maximisation under worst-case mark-to-market wealth constraints
in a complete Black-Scholes-Merton market."""

__version__ = "0.1.0"

from .arbitrage import (ArbPortfolio, CallCurve, ConsistencyReport, Violation,
                        bs_curve, call_admissibility, check_consistency,
                        construct_arbitrage, critical_strikes)
from .callmax import (CallPosition, MaxPlusSolution, expected_sup_J,
                      lambda_sweep, optimal_utility, rstar, solve_M,
                      terminal_wealth_cdf, u_pow, zeta)
from .errors import (AccuracyError, ConfigError, DomainError, InfeasibleError,
                     UnsupportedRegimeError)
from .lattice import LatticeProcessSpec, LatticeSolution, snell_lattice
from .market import (MarketParams, Measure, discounted_prices, driver_levels,
                     simulate_paths)
from .onetouch import (HedgeMode, OneTouchSpec, certainty_equivalent,
                       hobson_optimal_strike, hobson_payoff, onetouch_price,
                       utility_dynamic_only, utility_semi_static, varphi_Q)
from .onetouch import sweep as onetouch_sweep
from .passage import (LineBoundary, gamma0, gamma1, gamma1_by_inversion,
                      gamma2, hit_cdf, laplace_invert)
from .payoffs import (OneTouchState, PiecewisePayoff, convex_minorant,
                      intrinsic_european, intrinsic_hobson_package,
                      intrinsic_onetouch)
from .pricing import (CallQuote, atm_forward_call, bs_call, bs_put,
                      expected_local_time, norm_cdf, rho, z)
from .tables import ResultTable
from .verification import MaxPlusReport, supermartingale_drift, verify_maxplus
