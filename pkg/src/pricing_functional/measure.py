"""Pricing measures dF on the half-line and the shared Stieltjes integral.

A measure is a finite list of atoms plus at most one absolutely continuous
part. Distribution-function queries are exact (closed form for every
density family below); integrals of arbitrary functions go through
:func:`stieltjes_integrate`, which sums atoms exactly and applies adaptive
Gauss-Kronrod quadrature to the density part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from scipy.special import ndtr

from pricing_functional._quadrature import ABS_TOL, REL_TOL, QuadratureError, integrate

__all__ = [
    "Interval",
    "Lognormal",
    "Measure",
    "QuadratureError",
    "StieltjesMeasure",
    "Tabulated",
    "Uniform",
    "cdf",
    "cdf_left",
    "mean",
    "stieltjes_integrate",
]

# Standard-normal quantile beyond which the tail mass is below 1e-12.
TAIL_Z = 7.1
# Extra log-space margin so that integrands growing like x**4 stay covered.
TAIL_TILT = 4.0
MASS_CAP_TOL = 1e-8


# ---------------------------------------------------------------------------
# density families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lognormal:
    """Zero-rate Black-Scholes law of S_T, scaled to total mass ``mass``.

    ``log S_T ~ N(log s0 - vol**2 T / 2, vol**2 T)``, so the mean is ``mass * s0``.
    """

    s0: float
    vol: float
    maturity: float
    mass: float = 1.0

    def __post_init__(self):
        if not (self.s0 > 0 and self.vol > 0 and self.maturity > 0 and self.mass >= 0):
            raise ValueError("lognormal needs s0, vol, maturity > 0 and mass >= 0")

    @property
    def _s(self) -> float:
        return self.vol * math.sqrt(self.maturity)

    @property
    def _mu(self) -> float:
        return math.log(self.s0) - 0.5 * self._s**2

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        z = (np.log(x[pos]) - self._mu) / self._s
        out[pos] = self.mass * np.exp(-0.5 * z * z) / (x[pos] * self._s * math.sqrt(2 * math.pi))
        return out

    def _z(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return (np.log(np.maximum(x, 0.0)) - self._mu) / self._s

    def cdf(self, x):
        return self.mass * ndtr(self._z(x))

    def partial_mean(self, x):
        """``∫_{(-inf, x]} t f(t) dt``."""
        return self.mass * self.s0 * ndtr(self._z(x) - self._s)

    def survival(self, x):
        """``∫_{(x, inf)} f``, evaluated without cancellation."""
        return self.mass * ndtr(-self._z(x))

    def upper_mean(self, x):
        """``∫_{(x, inf)} t f(t) dt``, evaluated without cancellation."""
        return self.mass * self.s0 * ndtr(self._s - self._z(x))

    @property
    def total_mass(self) -> float:
        return self.mass

    @property
    def nodes(self) -> tuple[float, ...]:
        return (float(np.exp(self._mu)),)

    @property
    def support(self) -> tuple[float, float]:
        half = (TAIL_Z + TAIL_TILT * self._s) * self._s
        return float(np.exp(self._mu - half)), float(np.exp(self._mu + half))

    @property
    def tail_cut(self) -> float:
        return self.support[1]


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear density through ``(x[i], y[i])``, zero outside ``[x[0], x[-1]]``."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.x, dtype=float)
        ys = np.asarray(self.y, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValueError("tabulated density needs matching x, y of length >= 2")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("tabulated density grid must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("tabulated density must be finite")
        object.__setattr__(self, "x", tuple(map(float, xs)))
        object.__setattr__(self, "y", tuple(map(float, ys)))

    @property
    def _xs(self) -> np.ndarray:
        return np.asarray(self.x)

    @property
    def _ys(self) -> np.ndarray:
        return np.asarray(self.y)

    def pdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self._xs, self._ys, left=0.0, right=0.0)

    def _segment_integrals(self, x, power: int):
        # exact ∫_{x0}^{min(x, xn)} t**power * f(t) dt, f linear on each segment
        xs, ys = self._xs, self._ys
        slopes = np.diff(ys) / np.diff(xs)

        def piece(x0, y0, m, d):
            if power == 0:
                return y0 * d + m * d * d / 2
            return x0 * y0 * d + (x0 * m + y0) * d * d / 2 + m * d**3 / 3

        full = piece(xs[:-1], ys[:-1], slopes, np.diff(xs))
        cum = np.concatenate([[0.0], np.cumsum(full)])
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, xs[0], xs[-1])
        i = np.clip(np.searchsorted(xs, xc, side="right") - 1, 0, len(slopes) - 1)
        return cum[i] + piece(xs[i], ys[i], slopes[i], xc - xs[i])

    def cdf(self, x):
        return self._segment_integrals(x, 0)

    def partial_mean(self, x):
        return self._segment_integrals(x, 1)

    def survival(self, x):
        return self.total_mass - self.cdf(x)

    def upper_mean(self, x):
        return self.partial_mean(self.x[-1]) - self.partial_mean(x)

    @property
    def total_mass(self) -> float:
        return float(self.cdf(self.x[-1]))

    @property
    def nodes(self) -> tuple[float, ...]:
        return self.x

    @property
    def support(self) -> tuple[float, float]:
        return self.x[0], self.x[-1]

    @property
    def tail_cut(self) -> float:
        return self.x[-1]

    def split(self) -> tuple["Tabulated", "Tabulated"]:
        """Positive and negative parts, exact: zero crossings become grid nodes."""
        xs, ys = list(self.x), list(self.y)
        nx, ny = [xs[0]], [ys[0]]
        for x0, y0, x1, y1 in zip(xs[:-1], ys[:-1], xs[1:], ys[1:]):
            if y0 * y1 < 0:
                xz = x0 - y0 * (x1 - x0) / (y1 - y0)
                if x0 < xz < x1:
                    nx.append(xz)
                    ny.append(0.0)
            nx.append(x1)
            ny.append(y1)
        arr = np.asarray(ny)
        return Tabulated(tuple(nx), tuple(np.maximum(arr, 0.0))), Tabulated(tuple(nx), tuple(np.maximum(-arr, 0.0)))


@dataclass(frozen=True)
class Uniform:
    """Constant density ``value`` on ``[lo, hi]``; ``hi`` may be infinite."""

    value: float
    lo: float = 0.0
    hi: float = math.inf

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("uniform density needs lo < hi")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), self.value, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.value * (np.clip(x, self.lo, self.hi) - self.lo)

    def partial_mean(self, x):
        c = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return self.value * (c * c - self.lo**2) / 2

    def survival(self, x):
        return self.value * (self.hi - np.clip(np.asarray(x, dtype=float), self.lo, self.hi))

    def upper_mean(self, x):
        c = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return self.value * (self.hi**2 - c * c) / 2

    @property
    def total_mass(self) -> float:
        return math.inf if math.isinf(self.hi) else self.value * (self.hi - self.lo)

    @property
    def nodes(self) -> tuple[float, ...]:
        return (self.lo,) if math.isinf(self.hi) else (self.lo, self.hi)

    @property
    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    @property
    def tail_cut(self) -> float:
        return self.hi


Density = Union[Lognormal, Tabulated, Uniform]


# ---------------------------------------------------------------------------
# intervals and measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Interval with explicit endpoint flags; the default is half-open ``(lo, hi]``."""

    lo: float = -math.inf
    hi: float = math.inf
    closed_lo: bool = False
    closed_hi: bool = True

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        left = x >= self.lo if self.closed_lo else x > self.lo
        right = x <= self.hi if self.closed_hi else x < self.hi
        return left & right

    @classmethod
    def closed(cls, lo: float, hi: float) -> "Interval":
        return cls(lo, hi, True, True)

    @classmethod
    def open(cls, lo: float, hi: float) -> "Interval":
        return cls(lo, hi, False, False)

    @classmethod
    def right_open(cls, lo: float, hi: float) -> "Interval":
        """``[lo, hi)``"""
        return cls(lo, hi, True, False)


def _normalize_atoms(atoms: Iterable[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    pairs = sorted((float(x), float(w)) for x, w in atoms)
    locs = [x for x, _ in pairs]
    if len(set(locs)) != len(locs):
        raise ValueError("atom locations must be distinct")
    if not all(math.isfinite(x) and math.isfinite(w) for x, w in pairs):
        raise ValueError("atoms must be finite")
    return tuple(pairs)


@dataclass(frozen=True)
class StieltjesMeasure:
    """Signed, locally finite measure: atoms plus an optional density.

    Used for payoff curvature measures. Total variation may be infinite on
    an unbounded support (``x**2`` has curvature ``2 dx`` on the half-line).
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: Density | None = None
    support: tuple[float, float] = (0.0, math.inf)

    def __post_init__(self):
        object.__setattr__(self, "atoms", _normalize_atoms(self.atoms))
        object.__setattr__(self, "support", (float(self.support[0]), float(self.support[1])))
        lo, hi = self.support
        if any(not lo <= x <= hi for x, _ in self.atoms):
            raise ValueError("atom outside declared support")
        if self.density is not None:
            dlo, dhi = self.density.support
            if dlo < lo or dhi > hi:
                raise ValueError("density outside declared support")

    @property
    def locations(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)

    @property
    def is_positive(self) -> bool:
        if any(w < 0 for _, w in self.atoms):
            return False
        d = self.density
        if isinstance(d, Tabulated):
            return min(d.y) >= 0
        if isinstance(d, Uniform):
            return d.value >= 0
        return True

    def parts(self) -> tuple["StieltjesMeasure", "StieltjesMeasure"]:
        """Jordan decomposition ``(nu_plus, nu_minus)``, both nonnegative."""
        pos_atoms = tuple((x, w) for x, w in self.atoms if w > 0)
        neg_atoms = tuple((x, -w) for x, w in self.atoms if w < 0)
        d = self.density
        if d is None:
            dp = dn = None
        elif isinstance(d, Tabulated):
            dp, dn = d.split()
        elif isinstance(d, Uniform):
            dp, dn = (d, None) if d.value >= 0 else (None, Uniform(-d.value, d.lo, d.hi))
        else:
            dp, dn = d, None
        return (
            StieltjesMeasure(pos_atoms, dp, self.support),
            StieltjesMeasure(neg_atoms, dn, self.support),
        )

    def mass(self, interval: Interval = Interval()) -> float:
        """Signed mass of an interval, exact."""
        total = float(self.weights[interval.contains(self.locations)].sum()) if self.atoms else 0.0
        if self.density is not None:
            total += float(self.density.cdf(interval.hi) - self.density.cdf(interval.lo))
        return total

    def total_variation(self, interval: Interval = Interval()) -> float:
        pos, neg = self.parts()
        return pos.mass(interval) + neg.mass(interval)

    def restrict(self, interval: Interval) -> "StieltjesMeasure":
        """Restriction to ``interval`` (atoms filtered; the density is cut at the endpoints)."""
        atoms = tuple((x, w) for x, w in self.atoms if interval.contains(x))
        lo = max(self.support[0], interval.lo)
        hi = min(self.support[1], interval.hi)
        d = self.density
        if d is not None:
            dlo, dhi = d.support
            a, b = max(dlo, lo), min(dhi, hi)
            if not a < b:
                d = None
            elif isinstance(d, Uniform):
                d = Uniform(d.value, a, b)
            elif isinstance(d, Tabulated):
                inner = [x for x in d.x if a < x < b]
                xs = [a, *inner, b]
                d = Tabulated(tuple(xs), tuple(float(v) for v in d.pdf(np.array(xs))))
            else:
                raise TypeError("only tabulated/uniform curvature densities can be restricted")
        if not lo < hi:
            lo, hi = interval.lo, interval.hi
        return StieltjesMeasure(atoms, d, (lo, hi))


@dataclass(frozen=True)
class Measure(StieltjesMeasure):
    """Positive finite pricing measure dF on ``[0, inf)``.

    Attributes:
        atoms: ``(location, weight)`` pairs, locations >= 0, weights > 0.
        density: optional absolutely continuous part.
        finite_mean: whether call-side quantities are defined.
        total_mass_cap: declared ``F(inf)`` (the bond price), checked on construction.
    """

    finite_mean: bool = True
    total_mass_cap: float | None = None

    def __post_init__(self):
        super().__post_init__()
        if any(x < 0 for x, _ in self.atoms) or self.support[0] < 0:
            raise ValueError("pricing measure must live on [0, inf)")
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("atom weights must be strictly positive")
        d = self.density
        if isinstance(d, Tabulated) and min(d.y) < 0:
            raise ValueError("density must be nonnegative")
        if isinstance(d, Uniform) and d.value < 0:
            raise ValueError("density must be nonnegative")
        if not math.isfinite(self.total_mass):
            raise ValueError("pricing measure must have finite total mass")
        if self.total_mass_cap is not None and abs(self.total_mass - self.total_mass_cap) > MASS_CAP_TOL:
            raise ValueError(
                f"total mass {self.total_mass!r} disagrees with declared F(inf)={self.total_mass_cap!r}"
            )

    @property
    def total_mass(self) -> float:
        """``F(inf)``."""
        dens = self.density.total_mass if self.density is not None else 0.0
        return math.fsum(w for _, w in self.atoms) + dens

    def cdf(self, x):
        """Right-continuous ``F(x) = dF([0, x])``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.atoms:
            cum = np.concatenate([[0.0], np.cumsum(self.weights)])
            out = out + cum[np.searchsorted(self.locations, x, side="right")]
        if self.density is not None:
            out = out + self.density.cdf(x)
        return out if out.ndim else float(out)

    def cdf_left(self, x):
        """Left limit ``F(x-) = dF([0, x))``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.atoms:
            cum = np.concatenate([[0.0], np.cumsum(self.weights)])
            out = out + cum[np.searchsorted(self.locations, x, side="left")]
        if self.density is not None:
            out = out + self.density.cdf(x)
        return out if out.ndim else float(out)

    def survival(self, x):
        """``F(inf) - F(x) = dF((x, inf))``, summed directly so deep tails keep relative accuracy."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.atoms:
            upper = np.concatenate([np.cumsum(self.weights[::-1])[::-1], [0.0]])
            out = out + upper[np.searchsorted(self.locations, x, side="right")]
        if self.density is not None:
            out = out + self.density.survival(x)
        return out if out.ndim else float(out)

    def survival_left(self, x):
        """``F(inf) - F(x-) = dF([x, inf))``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.atoms:
            upper = np.concatenate([np.cumsum(self.weights[::-1])[::-1], [0.0]])
            out = out + upper[np.searchsorted(self.locations, x, side="left")]
        if self.density is not None:
            out = out + self.density.survival(x)
        return out if out.ndim else float(out)

    def partial_mean(self, x):
        """``∫_{[0, x]} t dF(t)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.atoms:
            cum = np.concatenate([[0.0], np.cumsum(self.weights * self.locations)])
            out = out + cum[np.searchsorted(self.locations, x, side="right")]
        if self.density is not None:
            out = out + self.density.partial_mean(x)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        """``∫ x dF(x)``, the forward price."""
        if not self.finite_mean:
            raise ValueError("measure is not flagged finite_mean")
        m = math.fsum(w * x for x, w in self.atoms)
        if self.density is not None:
            tail = float(self.density.partial_mean(math.inf))
            if not math.isfinite(tail):
                raise QuadratureError("first moment of the density part does not converge")
            m += tail
        return m

    @property
    def tail_cut(self) -> float:
        """A point beyond which the measure carries (numerically) no mass."""
        top = self.atoms[-1][0] if self.atoms else 0.0
        if self.density is not None:
            top = max(top, self.density.tail_cut)
        return top

    def put(self, k):
        """Exact put prices ``∫ (k - x)^+ dF``."""
        k = np.asarray(k, dtype=float)
        kk = np.maximum(k, 0.0)
        out = np.maximum(kk * self.cdf(kk) - self.partial_mean(kk), 0.0)
        return out if out.ndim else float(out)

    def call(self, k):
        """Exact call prices ``∫ (x - k)^+ dF``."""
        k = np.asarray(k, dtype=float)
        if not self.finite_mean:
            raise ValueError("measure is not flagged finite_mean")
        kk = np.maximum(k, 0.0)
        # upper tails are summed directly so deep out-of-the-money calls keep relative accuracy
        out = np.zeros_like(kk)
        for x, w in self.atoms:
            out = out + w * np.maximum(x - kk, 0.0)
        if self.density is not None:
            out = out + np.maximum(self.density.upper_mean(kk) - kk * self.density.survival(kk), 0.0)
        # left of zero the call is affine: C(k) = mean - k F(inf)
        out = out - np.minimum(k, 0.0) * self.total_mass
        return out if out.ndim else float(out)


def cdf(measure: Measure, x):
    return measure.cdf(x)


def cdf_left(measure: Measure, x):
    return measure.cdf_left(x)


def mean(measure: Measure) -> float:
    return measure.mean()


def stieltjes_integrate(
    f: Callable,
    m: StieltjesMeasure,
    interval: Interval = Interval(),
    breakpoints: Iterable[float] = (),
    abs_tol: float = ABS_TOL,
    rel_tol: float = REL_TOL,
) -> float:
    """``∫_interval f dm``: exact sum over atoms plus quadrature over the density.

    ``f`` may be a vectorized callable or a plain scalar function. Atom
    membership follows the interval's open/closed flags exactly. Known kinks
    of ``f`` should be passed as ``breakpoints`` so no quadrature cell
    straddles them.

    Raises:
        ValueError: if ``f`` is not finite at an atom inside the interval.
        QuadratureError: if the density part does not converge.
    """
    total = 0.0
    if m.atoms:
        locs = m.locations
        inside = interval.contains(locs)
        if inside.any():
            xs = locs[inside]
            try:
                vals = np.asarray(f(xs), dtype=float)
                if vals.shape != xs.shape:
                    raise ValueError
            except (TypeError, ValueError):
                vals = np.array([float(f(float(x))) for x in xs])
            bad = ~np.isfinite(vals)
            if bad.any():
                raise ValueError(f"integrand undefined at atom x={xs[bad][0]!r}")
            total += math.fsum(vals * m.weights[inside])
    d = m.density
    if d is not None:
        dlo, dhi = d.support
        lo, hi = max(interval.lo, dlo), min(interval.hi, dhi)
        if lo < hi:
            pts = [p for p in (*d.nodes, *breakpoints) if lo < p < hi]

            def integrand(x):
                x = np.asarray(x, dtype=float)
                try:
                    fx = np.asarray(f(x), dtype=float)
                    if fx.shape != x.shape:
                        raise ValueError
                except (TypeError, ValueError):
                    fx = np.array([float(f(float(t))) for t in np.atleast_1d(x)]).reshape(x.shape)
                dens = d.pdf(x)
                # f may be unbounded where the density vanishes (e.g. x**4 far out)
                with np.errstate(invalid="ignore", over="ignore"):
                    return np.where(dens == 0.0, 0.0, fx * dens)

            val, _ = integrate(integrand, lo, hi, pts, abs_tol=abs_tol, rel_tol=rel_tol)
            total += val
    return total
