"""Pricing convex, difference-of-convex and piecewise-DC payoffs from call prices.

A DC payoff is stored through its curvature measure ``nu``:

    g(x) = g0 + slope0 * x + ∫_(0, inf) (x - k)^+ dnu(k),

and its price from the call curve is

    π(g) = g0 * F(inf) + slope0 * mean + ∫_(0, inf) C dnu.

Piecewise payoffs add boundary terms at each breakpoint, built from one-sided
slopes of C (``D+C = F - F(inf)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from pricing_functional.curves import PriceCurve, interpolation_gap, left_derivative, right_derivative
from pricing_functional.measure import (
    Interval,
    Measure,
    StieltjesMeasure,
    Tabulated,
    stieltjes_integrate,
)
from pricing_functional.portfolio import Option, Portfolio

DEFAULT_TAIL_BUDGET = 1e-8


class TailBudgetError(ValueError):
    """Curvature mass beyond the last quoted strike is not covered by the tail policy."""


# ---------------------------------------------------------------------------
# payoff types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DCPayoff:
    """Difference-of-convex payoff ``g0 + slope0 x + ∫ (x-k)^+ dnu(k)`` on ``[0, inf)``.

    ``approximate`` marks curvature obtained by numerical differentiation.
    """

    g0: float
    slope0: float
    curvature: StieltjesMeasure = field(default_factory=StieltjesMeasure)
    evaluator: Callable | None = None
    approximate: bool = False

    def __post_init__(self):
        if self.curvature.support[0] < 0:
            raise ValueError("curvature must live on [0, inf)")
        if any(x == 0.0 for x, _ in self.curvature.atoms):
            raise ValueError("curvature atom at 0 belongs in slope0")

    @property
    def is_convex(self) -> bool:
        return self.curvature.is_positive

    def value(self, x):
        """Reconstruction identity, exact for every supported curvature family."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.empty_like(flat)
        for i, xi in enumerate(flat):
            if xi <= 0:
                out[i] = self.g0 + self.slope0 * xi
                continue
            cell = Interval(0.0, xi)
            out[i] = self.g0 + self.slope0 * xi + xi * self.curvature.mass(cell) - _first_moment(self.curvature, cell)
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def right_slope(self, x: float) -> float:
        """``D+g(x) = slope0 + nu((0, x])``."""
        return self.slope0 + self.curvature.mass(Interval(0.0, x)) if x > 0 else self.slope0

    def left_slope(self, x: float) -> float:
        """``D-g(x) = slope0 + nu((0, x))``."""
        return self.slope0 + self.curvature.mass(Interval.open(0.0, x)) if x > 0 else self.slope0

    def __call__(self, x):
        return self.value(x)


def _first_moment(m: StieltjesMeasure, cell: Interval) -> float:
    total = math.fsum(w * x for x, w in m.atoms if cell.contains(x))
    if m.density is not None:
        total += float(m.density.partial_mean(cell.hi) - m.density.partial_mean(cell.lo))
    return total


@dataclass(frozen=True)
class DCPiece:
    """One piece on ``[a, b)``: ``g(x) = value_a + slope_a (x - a) + ∫_(a, x] (x - k) dnu``."""

    a: float
    b: float
    value_a: float
    slope_a: float
    curvature: StieltjesMeasure = field(default_factory=StieltjesMeasure)

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"piece needs a < b, got [{self.a}, {self.b})")
        if self.a < 0:
            raise ValueError("pieces must start at a >= 0")
        object.__setattr__(self, "curvature", self.curvature.restrict(Interval.open(self.a, self.b)))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros_like(flat)
        for i, xi in enumerate(flat):
            if not self.a <= xi < self.b:
                continue
            cell = Interval(self.a, xi)
            out[i] = (
                self.value_a
                + self.slope_a * (xi - self.a)
                + xi * self.curvature.mass(cell)
                - _first_moment(self.curvature, cell)
            )
        return out.reshape(x.shape) if x.ndim else float(out[0])

    @property
    def value_b_left(self) -> float:
        """``g(b-)``; zero-growth limit for an unbounded piece is not defined."""
        if math.isinf(self.b):
            raise ValueError("unbounded piece has no g(b-)")
        cell = Interval.open(self.a, self.b)
        return (
            self.value_a
            + self.slope_a * (self.b - self.a)
            + self.b * self.curvature.mass(cell)
            - _first_moment(self.curvature, cell)
        )

    @property
    def slope_b_left(self) -> float:
        """``D+g(b-) = D+g(a) + nu((a, b))``."""
        return self.slope_a + self.curvature.mass(Interval.open(self.a, self.b))


@dataclass(frozen=True)
class PiecewiseDCPayoff:
    """Càdlàg payoff made of DC pieces on disjoint ``[a_n, b_n)``; zero elsewhere."""

    pieces: tuple[DCPiece, ...]

    def __post_init__(self):
        ps = tuple(sorted(self.pieces, key=lambda p: p.a))
        for p, q in zip(ps[:-1], ps[1:]):
            if q.a < p.b:
                raise ValueError(f"pieces overlap at {q.a}")
        object.__setattr__(self, "pieces", ps)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = set()
        for p in self.pieces:
            pts.add(p.a)
            if math.isfinite(p.b):
                pts.add(p.b)
        return tuple(sorted(pts))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for p in self.pieces:
            out = out + p.value(x)
        return out if out.ndim else float(out)

    def __call__(self, x):
        return self.value(x)


# ---------------------------------------------------------------------------
# curvature helpers
# ---------------------------------------------------------------------------

def normalize_dc(payoff: DCPayoff) -> tuple[tuple[float, float], DCPayoff]:
    """Split off the affine part: ``((g0, slope0), payoff with g0 = slope0 = 0)``."""
    norm = replace(payoff, g0=0.0, slope0=0.0, evaluator=None)
    return (payoff.g0, payoff.slope0), norm


def curvature_from_function(g: Callable, grid: Sequence[float]) -> DCPayoff:
    """Tabulate the curvature of a C² payoff from second differences on ``grid``.

    ``grid[0]`` must be 0. The result is flagged ``approximate``; the curvature
    is supported on ``[grid[0], grid[-1]]`` so the payoff is continued
    linearly past the last node.
    """
    xs = np.asarray(grid, dtype=float)
    if xs.size < 3 or xs[0] != 0.0 or np.any(np.diff(xs) <= 0):
        raise ValueError("grid must start at 0, be increasing and have >= 3 points")
    gv = np.asarray([float(g(x)) for x in xs])
    h = np.diff(xs)
    s = np.diff(gv) / h
    d2 = 2 * np.diff(s) / (h[:-1] + h[1:])
    dens = np.concatenate([[d2[0]], d2, [d2[-1]]])
    # one-sided second-order slope at 0
    h0, h1 = h[0], h[1]
    slope0 = (-(2 * h0 + h1) * gv[0] / (h0 * (h0 + h1)) + (h0 + h1) * gv[1] / (h0 * h1) - h0 * gv[2] / (h1 * (h0 + h1)))
    nu = StieltjesMeasure(density=Tabulated(tuple(xs), tuple(dens)), support=(0.0, float(xs[-1])))
    return DCPayoff(float(gv[0]), float(slope0), nu, evaluator=g, approximate=True)


# ---------------------------------------------------------------------------
# pricing from the call curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PriceBreakdown:
    price: float
    bond_term: float
    forward_term: float
    curvature_term: float
    boundary_term: float = 0.0
    tail_bound: float = 0.0
    interpolation_bound: float = 0.0


def _metadata(call: PriceCurve) -> tuple[float, float]:
    if call.role != "call":
        raise ValueError("replication prices need a call curve")
    if call.f_infinity is None or call.mean is None:
        raise ValueError("call curve is missing f_infinity/mean metadata")
    return float(call.f_infinity), float(call.mean)


def _integrate_call(
    call: PriceCurve, nu: StieltjesMeasure, cell: Interval, tail_budget: float
) -> tuple[float, float, float]:
    """``∫_cell C dnu`` for a nonnegative ``nu``.

    Returns ``(value, tail_bound, interpolation_bound)``. The interpolation
    bound is zero for evaluator-backed curves.
    """
    if not nu.atoms and nu.density is None:
        return 0.0, 0.0, 0.0
    pts = {*call.kinks, *(float(k) for k in call.strikes)}
    if call.tail_cut is not None:
        pts.add(call.tail_cut)
    if call.evaluator is not None:
        return stieltjes_integrate(call.value, nu, cell, breakpoints=pts), 0.0, 0.0
    k_max = call.k_max
    inner = Interval(cell.lo, min(cell.hi, k_max), cell.closed_lo, cell.closed_hi if cell.hi <= k_max else True)
    value = gap = 0.0
    if inner.lo < inner.hi:
        value = stieltjes_integrate(call.value, nu, inner, breakpoints=pts)
        gap = stieltjes_integrate(lambda k: interpolation_gap(call, k), nu, inner, breakpoints=pts)
    if cell.hi <= k_max:
        return value, 0.0, gap
    beyond = Interval(max(cell.lo, k_max), cell.hi, cell.lo >= k_max and cell.closed_lo, cell.closed_hi)
    tail_mass = nu.mass(beyond)
    if tail_mass == 0.0:
        return value, 0.0, gap
    if call.tail == "exponential":
        return value + stieltjes_integrate(call.value, nu, beyond, breakpoints=pts), 0.0, gap
    c_last = max(float(call.values[-1]), 0.0)
    bound = 0.0 if c_last == 0.0 else c_last * tail_mass
    if bound > tail_budget:
        raise TailBudgetError(
            f"curvature mass {tail_mass:g} beyond last strike {k_max:g} with C={c_last:g} "
            f"exceeds tail budget {tail_budget:g}"
        )
    return value, bound, gap


def replication_breakdown(
    call: PriceCurve, payoff: DCPayoff, tail_budget: float = DEFAULT_TAIL_BUDGET
) -> PriceBreakdown:
    """``g0 F(inf) + slope0 mean + ∫ C dnu+ - ∫ C dnu-`` with its components."""
    f_inf, mean = _metadata(call)
    pos, neg = payoff.curvature.parts()
    cell = Interval(0.0, math.inf)
    ip, bp, gp = _integrate_call(call, pos, cell, tail_budget)
    im, bm, gm = _integrate_call(call, neg, cell, tail_budget)
    bond = payoff.g0 * f_inf
    fwd = payoff.slope0 * mean
    return PriceBreakdown(bond + fwd + ip - im, bond, fwd, ip - im, tail_bound=bp + bm, interpolation_bound=gp + gm)


def price_convex(call: PriceCurve, payoff: DCPayoff, tail_budget: float = DEFAULT_TAIL_BUDGET) -> float:
    """Price of a convex payoff from call prices."""
    if not payoff.is_convex:
        raise ValueError("payoff curvature is not a positive measure; use price_dc")
    return replication_breakdown(call, payoff, tail_budget).price


def price_dc(call: PriceCurve, payoff: DCPayoff, tail_budget: float = DEFAULT_TAIL_BUDGET) -> float:
    """Price of a difference-of-convex payoff (signed curvature)."""
    return replication_breakdown(call, payoff, tail_budget).price


def _on_grid(call: PriceCurve, x: float) -> None:
    if call.evaluator is not None:
        return
    if x > call.k_max:
        raise ValueError(f"breakpoint {x} beyond curve span [{call.strikes[0]}, {call.k_max}]")
    if not np.any(call.strikes == x) and x != 0.0:
        raise ValueError(f"breakpoint {x} is not a quoted strike")


def piece_breakdown(
    call: PriceCurve, piece: DCPiece, tail_budget: float = DEFAULT_TAIL_BUDGET
) -> PriceBreakdown:
    """``∫_[a, b) g dF`` for one piece from call quotes.

    Interior ``∫_(a, b) C dnu`` plus ``C(a) D+g(a) - D+C(a) g(a)``,
    ``- C(b) D+g(b-) + D+C(b-) g(b-)`` and the atom term ``g(a) (D+C(a) - D-C(a))``.
    The ``b`` terms vanish for an unbounded piece.
    """
    _metadata(call)
    a, b = piece.a, piece.b
    _on_grid(call, a)
    if math.isfinite(b):
        _on_grid(call, b)
    pos, neg = piece.curvature.parts()
    cell = Interval.open(a, b)
    ip, bp, gp = _integrate_call(call, pos, cell, tail_budget)
    im, bm, gm = _integrate_call(call, neg, cell, tail_budget)
    ga, sa = piece.value_a, piece.slope_a
    c_a = float(call.value(a))
    dc_a = right_derivative(call, a)
    dc_a_left = left_derivative(call, a)
    boundary = c_a * sa - dc_a * ga + ga * (dc_a - dc_a_left)
    if math.isfinite(b):
        c_b = float(call.value(b))
        dc_b_left = left_derivative(call, b)
        boundary += -c_b * piece.slope_b_left + dc_b_left * piece.value_b_left
    interior = ip - im
    return PriceBreakdown(interior + boundary, 0.0, 0.0, interior, boundary, bp + bm, gp + gm)


def price_piecewise_dc(
    call: PriceCurve, payoff: PiecewiseDCPayoff, tail_budget: float = DEFAULT_TAIL_BUDGET
) -> float:
    """Price of a piecewise-DC payoff: per-piece interior integrals plus boundary terms."""
    parts = [piece_breakdown(call, p, tail_budget).price for p in payoff.pieces]
    return math.fsum(parts)


def dyadic_call_portfolio(payoff: DCPayoff, level: int, strike: str = "barycenter") -> Portfolio:
    """Undershooting call strip on the dyadic grid of mesh ``2**-level`` over ``(0, level]``.

    Cell ``(k_i, k_{i+1}]`` contributes ``nu((k_i, k_{i+1}])`` calls. With
    ``strike="right"`` they are struck at ``k_{i+1}``. With
    ``strike="barycenter"`` (default) they are struck at the nu-weighted mean
    strike of the cell; because ``(x - k)^+`` is convex in ``k`` this still
    undershoots ``g`` (Jensen), and splitting a cell can only raise the
    payoff, so monotonicity survives while the error drops from first to
    second order in the mesh. The grids are nested and widen with the level,
    so either strip increases pointwise to ``g``. The affine part of ``g`` is
    held as bond and forward units.
    """
    if not payoff.is_convex:
        raise ValueError("dyadic call strip needs a convex payoff")
    if level < 0:
        raise ValueError("level must be >= 0")
    if strike not in ("barycenter", "right"):
        raise ValueError(f"unknown strike placement {strike!r}")
    (g0, s0), norm = normalize_dc(payoff)
    n_cells = level * 2**level
    edges = np.arange(n_cells + 1) / 2.0**level
    nu = norm.curvature
    options = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        cell = Interval(float(lo), float(hi))
        q = nu.mass(cell)
        if q == 0.0:
            continue
        k = float(hi) if strike == "right" else min(max(_first_moment(nu, cell) / q, float(lo)), float(hi))
        options.append(Option(k, q, "call"))
    return Portfolio(bond_units=g0, forward_units=s0, options=tuple(options))


@dataclass(frozen=True)
class TailRow:
    a: float
    mass_term: float
    slope_term: float


def tail_decay_report(measure: Measure, payoff: DCPayoff, a_grid: Sequence[float]) -> list[TailRow]:
    """Rows ``(a, g(a) (F(inf) - F(a)), C(a) D+g(a))`` for the boundary terms that vanish at infinity."""
    rows = []
    for a in a_grid:
        a = float(a)
        g_a = float(payoff.value(a))
        rows.append(TailRow(a, g_a * float(measure.survival(a)), float(measure.call(a)) * payoff.right_slope(a)))
    return rows
