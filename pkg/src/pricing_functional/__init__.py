"""Pricing-functional calculus for European payoffs.

Represent the discounted risk-neutral measure ``dF`` of the underlying, map it
to put and call price curves and back, price convex and piecewise
difference-of-convex payoffs from call quotes, and recover put prices from
Hermite approximations of log-return densities.
"""

from __future__ import annotations

from pricing_functional.curves import (
    PriceCurve,
    bs_call,
    bs_put,
    call_curve,
    curve_violations,
    implied_vol,
    left_derivative,
    measure_curve_violations,
    parity_gap,
    put_curve,
    right_derivative,
)
from pricing_functional.measure import (
    Interval,
    Lognormal,
    Measure,
    StieltjesMeasure,
    Tabulated,
    Uniform,
    cdf,
    cdf_left,
    mean,
    stieltjes_integrate,
)
from pricing_functional.oracle import OracleConfig, OracleError, oracle_price
from pricing_functional.portfolio import Option, Portfolio
from pricing_functional.reconstruct import (
    CdfEstimate,
    cdf_from_puts,
    l1_approximation_report,
    put_spread_indicator,
    replicate_piecewise_linear,
)
from pricing_functional.replication import (
    DCPayoff,
    DCPiece,
    PiecewiseDCPayoff,
    TailBudgetError,
    dyadic_call_portfolio,
    normalize_dc,
    price_convex,
    price_dc,
    price_piecewise_dc,
    tail_decay_report,
)
from pricing_functional.returns import (
    DensityApprox,
    ThetaPayoff,
    hermite_project,
    pushforward_to_price,
    recover_put,
    theta_inner,
)

__all__ = [
    "CdfEstimate",
    "DCPayoff",
    "DCPiece",
    "DensityApprox",
    "Interval",
    "Lognormal",
    "Measure",
    "Option",
    "OracleConfig",
    "OracleError",
    "PiecewiseDCPayoff",
    "Portfolio",
    "PriceCurve",
    "StieltjesMeasure",
    "Tabulated",
    "TailBudgetError",
    "ThetaPayoff",
    "Uniform",
    "bs_call",
    "bs_put",
    "call_curve",
    "cdf",
    "cdf_from_puts",
    "cdf_left",
    "curve_violations",
    "dyadic_call_portfolio",
    "hermite_project",
    "implied_vol",
    "l1_approximation_report",
    "left_derivative",
    "mean",
    "measure_curve_violations",
    "normalize_dc",
    "oracle_price",
    "parity_gap",
    "price_convex",
    "price_dc",
    "price_piecewise_dc",
    "pushforward_to_price",
    "put_curve",
    "put_spread_indicator",
    "recover_put",
    "replicate_piecewise_linear",
    "right_derivative",
    "stieltjes_integrate",
    "tail_decay_report",
    "theta_inner",
]
