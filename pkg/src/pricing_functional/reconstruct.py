"""Recovering F from put quotes, and put-spread approximations of payoffs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from pricing_functional.curves import PriceCurve
from pricing_functional.measure import Measure
from pricing_functional.oracle import OracleConfig, oracle_price
from pricing_functional.portfolio import Option, OptionKind, Portfolio


@dataclass(frozen=True, eq=False)
class CdfEstimate:
    """Estimates ``f_hat[i]`` of ``F(strikes[i])`` with bracket widths ``bound[i]``.

    The last strike has no forward quotient and is not part of the estimate.
    """

    strikes: np.ndarray
    f_hat: np.ndarray
    bound: np.ndarray


def cdf_from_puts(put: PriceCurve) -> CdfEstimate:
    """Forward quotients of the put curve, ``(P(k[i+1]) - P(k[i])) / (k[i+1] - k[i])``.

    By convexity each quotient lies in ``[F(k[i]), F(k[i+1])]``, so it
    overshoots ``F(k[i])`` by at most its gap to the previous quotient
    (which is at most ``F(k[i])``). Left of the first strike the lower bound
    is ``P(k0) / k0 <= F(k0)``, or 0 at ``k0 = 0``. Quotients are not
    renormalized: ``F(inf)`` is the bond price, not 1.
    """
    if put.role != "put":
        raise ValueError("cdf_from_puts needs a put curve")
    ks = np.asarray(put.strikes, dtype=float)
    if ks.size < 2:
        raise ValueError("need at least two strikes")
    if np.any(np.diff(ks) <= 0):
        raise ValueError("strikes must be sorted and distinct")
    q = put.slopes
    floor0 = put.values[0] / ks[0] if ks[0] > 0 else 0.0
    lower = np.concatenate([[floor0], q[:-1]])
    bound = np.maximum(q - lower, 0.0)
    return CdfEstimate(ks[:-1].copy(), q.copy(), bound)


def put_spread_indicator(a: float, b: float) -> Portfolio:
    """Puts ``(P_b - P_a) / (b - a)``: payoff 1 on ``[0, a]``, 0 on ``[b, inf)``, linear between."""
    if not 0 <= a < b:
        raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
    alpha = 1.0 / (b - a)
    return Portfolio(options=(Option(b, alpha, "put"), Option(a, -alpha, "put")))


def replicate_piecewise_linear(
    nodes: Sequence[tuple[float, float]],
    terminal_slope: float = 0.0,
    kind: OptionKind = "put",
) -> Portfolio:
    """Exact static replication of a continuous piecewise-linear payoff.

    ``nodes`` are ``(x, g(x))`` with ``x[0] = 0``; beyond the last node the
    payoff continues with ``terminal_slope``. Each slope change becomes an
    option at that node. With puts the affine part is the terminal line;
    with calls it is the initial line.
    """
    xs = np.array([float(x) for x, _ in nodes])
    ys = np.array([float(y) for _, y in nodes])
    if xs.size == 0 or xs[0] != 0.0:
        raise ValueError("first node must sit at x=0")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("nodes must be sorted with distinct x")
    slopes = np.append(np.diff(ys) / np.diff(xs), terminal_slope)
    if xs.size == 1:
        return Portfolio(bond_units=ys[0], forward_units=terminal_slope)
    jumps = np.diff(slopes)
    options = tuple(
        Option(float(x), float(j), kind) for x, j in zip(xs[1:], jumps) if j != 0.0
    )
    if kind == "call":
        return Portfolio(bond_units=ys[0], forward_units=slopes[0], options=options)
    return Portfolio(
        bond_units=ys[-1] - terminal_slope * xs[-1],
        forward_units=terminal_slope,
        options=options,
    )


@dataclass(frozen=True)
class L1Report:
    l1_error: float
    price_error: float
    target_price: float
    portfolio_price: float


def l1_approximation_report(
    g: Callable,
    portfolio: Portfolio,
    measure: Measure,
    breakpoints: Iterable[float] = (),
    config: OracleConfig | None = None,
) -> L1Report:
    """``∫ |g - portfolio| dF`` and ``|π(g) - π(portfolio)|`` through the oracle."""
    cfg = config or OracleConfig()
    pts = tuple(breakpoints) + portfolio.breakpoints

    def gap(x):
        return np.abs(np.asarray(g(x), dtype=float) - portfolio.payoff(x))

    l1, _ = oracle_price(measure, gap, cfg, pts)
    target, _ = oracle_price(measure, g, cfg, pts)
    port = portfolio.price(measure)
    return L1Report(l1, abs(target - port), target, port)


def dyadic_indicator_spreads(a: float, levels: Iterable[int]) -> list[tuple[int, Portfolio]]:
    """Put spreads for ``1_[0, a]`` with ramp width ``2**-n``."""
    return [(n, put_spread_indicator(a, a + 2.0**-n)) for n in levels]
