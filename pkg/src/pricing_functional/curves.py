"""Put and call price curves, parity, one-sided slopes and implied volatility."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.special import ndtr

from pricing_functional.measure import Measure, Tabulated, Uniform

Role = Literal["put", "call"]
TailPolicy = Literal["truncate", "exponential"]

IV_BRACKET = (1e-9, 5.0)


@dataclass(frozen=True, eq=False)
class PriceCurve:
    """Option prices on a sorted strike grid.

    Attributes:
        role: ``"put"`` or ``"call"``.
        strikes, values: the grid and the quoted prices.
        f_infinity: bond price ``F(inf)``, if known.
        mean: forward price (mean of dF), if known.
        evaluator: closed-form price for off-grid strikes; without one the
            curve is piecewise linear between grid points.
        slope: exact one-sided derivative ``slope(k, side)`` with ``side=+1``
            for ``D+`` and ``-1`` for ``D-``; curves built from a measure carry
            one, otherwise slopes come from difference quotients.
        kinks: strikes where the curve is known to have a kink (atoms of dF).
        tail_cut: strike beyond which dF carries numerically no mass.
        tail: extrapolation policy beyond the last strike.
        coherent: False for curves built from signed density approximations.
    """

    role: Role
    strikes: np.ndarray
    values: np.ndarray
    f_infinity: float | None = None
    mean: float | None = None
    evaluator: Callable | None = None
    slope: Callable[[float, int], float] | None = None
    kinks: tuple[float, ...] = ()
    tail_cut: float | None = None
    tail: TailPolicy = "truncate"
    coherent: bool = True

    def __post_init__(self):
        if self.role not in ("put", "call"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.tail not in ("truncate", "exponential"):
            raise ValueError(f"unknown tail policy {self.tail!r}")
        k = np.array(self.strikes, dtype=float)
        v = np.array(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size == 0:
            raise ValueError("strikes and values must be 1-d arrays of equal length")
        if np.any(np.diff(k) <= 0):
            raise ValueError("strikes must be strictly increasing")
        if k[0] < 0:
            raise ValueError("strikes must be nonnegative")
        k.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "strikes", k)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kinks", tuple(sorted(float(x) for x in self.kinks)))

    @property
    def k_max(self) -> float:
        return float(self.strikes[-1])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.strikes)

    def on_grid(self) -> "PriceCurve":
        """Same quotes with the closed-form evaluator and slope dropped."""
        return replace(self, evaluator=None, slope=None)

    def value(self, k):
        """Price at arbitrary strikes (closed form if available, else piecewise linear)."""
        k = np.asarray(k, dtype=float)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(k), dtype=float)
        ks, vs = self.strikes, self.values
        out = np.interp(k, ks, vs)
        below = k < ks[0]
        if np.any(below):
            if self.role == "put" and ks[0] > 0 and self.values[0] == 0:
                out = np.where(below, 0.0, out)
            elif self.role == "call" and self.mean is not None:
                # chord from (0, mean): the convex upper bound on [0, k0]
                w = np.where(below, k / ks[0], 0.0) if ks[0] > 0 else 0.0
                out = np.where(below, (1 - w) * self.mean + w * vs[0], out)
            else:
                raise ValueError(f"strike below curve span [{ks[0]}, {ks[-1]}]")
        above = k > ks[-1]
        if np.any(above):
            out = np.where(above, self._tail(np.where(above, k, ks[-1])), out)
        return out

    def _tail(self, k):
        last = self.values[-1]
        if self.role == "call":
            if last == 0.0:
                return np.zeros_like(k)
            if self.tail == "exponential" and len(self.strikes) > 1:
                lam = -self.slopes[-1] / last
                if not (math.isfinite(lam) and lam > 0):
                    raise ValueError("exponential tail needs a strictly decreasing last call segment")
                return last * np.exp(-lam * (k - self.k_max))
        elif self.tail == "exponential" and None not in (self.f_infinity, self.mean) and len(self.strikes) > 1:
            c_last = last - self.k_max * self.f_infinity + self.mean
            if c_last <= 0:
                return last + (k - self.k_max) * self.f_infinity
            lam = -(self.slopes[-1] - self.f_infinity) / c_last
            if not (math.isfinite(lam) and lam > 0):
                raise ValueError("exponential tail needs a strictly decreasing last call segment")
            c = c_last * np.exp(-lam * (k - self.k_max))
            return c - self.mean + k * self.f_infinity
        raise ValueError(f"strike beyond last quote {self.k_max} under tail policy {self.tail!r}")


def _check_grid(strikes) -> np.ndarray:
    k = np.asarray(strikes, dtype=float)
    if k.ndim != 1 or np.any(np.diff(k) <= 0):
        raise ValueError("strikes must be sorted and distinct")
    if k.size and k[0] < 0:
        raise ValueError("strikes must be nonnegative")
    return k


def put_curve(measure: Measure, strikes: Sequence[float], evaluator: bool = True) -> PriceCurve:
    """``P(k) = ∫ (k - x)^+ dF`` on the grid; closed-form evaluator attached by default."""
    k = _check_grid(strikes)
    return PriceCurve(
        role="put",
        strikes=k,
        values=measure.put(k),
        f_infinity=measure.total_mass,
        mean=measure.mean() if measure.finite_mean else None,
        evaluator=measure.put if evaluator else None,
        slope=_put_slope(measure) if evaluator else None,
        kinks=_kinks(measure),
        tail_cut=measure.tail_cut,
    )


def call_curve(measure: Measure, strikes: Sequence[float], evaluator: bool = True) -> PriceCurve:
    """``C(k) = ∫ (x - k)^+ dF``; needs a finite-mean measure."""
    if not measure.finite_mean:
        raise ValueError("call prices are finite only if dF has a finite mean")
    k = _check_grid(strikes)
    return PriceCurve(
        role="call",
        strikes=k,
        values=measure.call(k),
        f_infinity=measure.total_mass,
        mean=measure.mean(),
        evaluator=measure.call if evaluator else None,
        slope=_call_slope(measure) if evaluator else None,
        kinks=_kinks(measure),
        tail_cut=measure.tail_cut,
    )


def _put_slope(measure: Measure) -> Callable[[float, int], float]:
    def slope(k: float, side: int) -> float:
        if k < 0 or (k == 0 and side < 0):
            return 0.0
        return float(measure.cdf(k) if side > 0 else measure.cdf_left(k))
    return slope


def _call_slope(measure: Measure) -> Callable[[float, int], float]:
    f_inf = measure.total_mass

    def slope(k: float, side: int) -> float:
        if k < 0 or (k == 0 and side < 0):
            return -f_inf
        return -float(measure.survival(k) if side > 0 else measure.survival_left(k))
    return slope


def _kinks(measure: Measure) -> tuple[float, ...]:
    pts = [x for x, _ in measure.atoms]
    if isinstance(measure.density, (Tabulated, Uniform)):
        pts.extend(p for p in measure.density.nodes if math.isfinite(p))
    return tuple(pts)


def parity_gap(put: PriceCurve, call: PriceCurve, f_infinity: float, mean: float) -> np.ndarray:
    """Residual ``C(k) - P(k) + k F(inf) - mean`` per strike; zero for consistent quotes."""
    if put.strikes.shape != call.strikes.shape or not np.array_equal(put.strikes, call.strikes):
        raise ValueError("put and call curves must share a strike grid")
    return call.values - put.values + put.strikes * f_infinity - mean


# ---------------------------------------------------------------------------
# one-sided slopes
# ---------------------------------------------------------------------------

def _fd_step(curve: PriceCurve, k: float) -> float:
    h = 1e-3 * max(1.0, abs(k))
    others = [abs(p - k) for p in curve.kinks if p != k]
    if others:
        h = min(h, 0.5 * min(others))
    return max(h, 1e-7 * max(1.0, abs(k)))


def _shrinking_difference(f: Callable[[float], float], k: float, h: float, sign: int, tol: float) -> float:
    # sign=+1 forward, -1 backward; stops when the quotient stops moving
    # (piecewise-linear regime) or when Richardson estimates agree
    def quotient(step):
        return sign * (f(k + sign * step) - f(k)) / step

    d1, d2, d4 = quotient(h), quotient(h / 2), quotient(h / 4)
    for _ in range(30):
        if abs(d2 - d4) <= tol:
            return d4
        r1, r2 = 2 * d2 - d1, 2 * d4 - d2
        if abs(r1 - r2) <= tol:
            return r2
        h /= 2
        d1, d2, d4 = d2, d4, quotient(h / 4)
    return 2 * d4 - d2


def right_derivative(curve: PriceCurve, k: float, tol: float = 1e-9) -> float:
    """``D+curve(k)``: ``F(k)`` for puts, ``F(k) - F(inf)`` for calls.

    Curves built from a measure use the exact slope. Grid curves use the
    forward quotient to the next grid point, which for a put lies in
    ``[F(k), F(k_next)]``. Other curves with an evaluator use shrinking
    forward differences.
    """
    k = float(k)
    if curve.slope is not None:
        return float(curve.slope(k, +1))
    if curve.evaluator is None:
        ks = curve.strikes
        if k >= ks[-1]:
            raise ValueError(f"k={k} at or beyond last grid point {ks[-1]}")
        if k < ks[0]:
            raise ValueError(f"k={k} below first grid point {ks[0]}")
        i = int(np.searchsorted(ks, k, side="right")) - 1
        return float(curve.slopes[i])

    def f(x):
        return float(curve.evaluator(np.asarray(x, dtype=float)))

    return _shrinking_difference(f, k, _fd_step(curve, k), +1, tol)


def left_derivative(curve: PriceCurve, k: float, tol: float = 1e-9) -> float:
    """``D-curve(k)``: ``F(k-)`` for puts, ``F(k-) - F(inf)`` for calls.

    At ``k = 0`` this is the boundary value ``F(0-) = 0``.
    """
    k = float(k)
    if k == 0.0:
        if curve.role == "put":
            return 0.0
        if curve.f_infinity is None:
            raise ValueError("call curve needs f_infinity for the slope at 0-")
        return -float(curve.f_infinity)
    if curve.slope is not None:
        return float(curve.slope(k, -1))
    if curve.evaluator is None:
        ks = curve.strikes
        if k <= ks[0] or k > ks[-1]:
            raise ValueError(f"k={k} outside ({ks[0]}, {ks[-1]}]")
        i = int(np.searchsorted(ks, k, side="left")) - 1
        return float(curve.slopes[i])

    def f(x):
        return float(curve.evaluator(np.asarray(x, dtype=float)))

    h = min(_fd_step(curve, k), 0.5 * k)
    return _shrinking_difference(f, k, h, -1, tol)


# ---------------------------------------------------------------------------
# shape checks
# ---------------------------------------------------------------------------

def curve_violations(curve: PriceCurve, tol: float = 1e-10) -> list[str]:
    """Shape checks that need only the curve itself; empty list if all pass.

    Messages name the strike, e.g. ``"put curve not convex at k=1.5"``.
    """
    if not curve.coherent:
        return []
    out = []
    ks, vs = curve.strikes, curve.values
    scale = tol * max(1.0, float(np.max(np.abs(vs))))
    name = f"{curve.role} curve"
    if np.any(vs < -scale):
        i = int(np.argmax(vs < -scale))
        out.append(f"{name} negative at k={ks[i]:g}")
    steps = np.diff(vs)
    bad = steps < -scale if curve.role == "put" else steps > scale
    if np.any(bad):
        i = int(np.argmax(bad)) + 1
        word = "nondecreasing" if curve.role == "put" else "nonincreasing"
        out.append(f"{name} not {word} at k={ks[i]:g}")
    if len(ks) > 2:
        s = curve.slopes
        h = np.minimum(np.diff(ks)[:-1], np.diff(ks)[1:])
        concave = (s[1:] - s[:-1]) * h < -scale
        if np.any(concave):
            i = int(np.argmax(concave)) + 1
            out.append(f"{name} not convex at k={ks[i]:g}")
    if curve.role == "put" and ks[0] == 0 and abs(vs[0]) > scale:
        out.append(f"put curve has P(0)={vs[0]:g}, expected 0")
    if curve.role == "call" and ks[0] == 0 and curve.mean is not None and abs(vs[0] - curve.mean) > scale:
        out.append(f"call curve has C(0)={vs[0]:g}, expected mean {curve.mean:g}")
    if curve.role == "put" and curve.f_infinity is not None and len(ks) > 1:
        if curve.slopes[-1] > curve.f_infinity + tol:
            out.append(f"put curve slope exceeds F(inf) near k={ks[-1]:g}")
    return out


def interpolation_gap(curve: PriceCurve, k) -> np.ndarray:
    """Upper bound on ``value(k) - true price`` for a grid-backed convex curve.

    On each cell the chord overestimates a convex function, and the extended
    chords of the two neighbouring cells (plus the no-arbitrage floors
    ``0`` and ``±(mean - k F(inf))``) underestimate it. The gap between the
    chord and that lower envelope bounds the interpolation error using
    nothing but the quotes. Evaluator-backed curves have zero gap.
    """
    k = np.asarray(k, dtype=float)
    if curve.evaluator is not None or len(curve.strikes) < 2:
        return np.zeros_like(k)
    ks, vs, s = curve.strikes, curve.values, curve.slopes
    kc = np.clip(k, ks[0], ks[-1])
    i = np.clip(np.searchsorted(ks, kc, side="right") - 1, 0, len(s) - 1)
    upper = np.asarray(curve.value(kc), dtype=float)
    lower = np.zeros_like(kc)
    if None not in (curve.f_infinity, curve.mean):
        affine = curve.mean - kc * curve.f_infinity
        lower = np.maximum(lower, affine if curve.role == "call" else -affine)
    for j in (i - 1, i + 1):
        ok = (j >= 0) & (j < len(s))
        jj = np.clip(j, 0, len(s) - 1)
        line = vs[jj] + s[jj] * (kc - ks[jj])
        lower = np.where(ok, np.maximum(lower, line), lower)
    return np.maximum(upper - lower, 0.0)


# ---------------------------------------------------------------------------
# Black-Scholes with zero rates
# ---------------------------------------------------------------------------

def bs_put(s0: float, k: float, maturity: float, sigma: float) -> float:
    """Zero-rate, zero-dividend Black-Scholes put; ``sigma=0`` gives intrinsic value."""
    if k <= 0:
        return 0.0
    sd = sigma * math.sqrt(maturity)
    if sd <= 0:
        return max(k - s0, 0.0)
    d1 = (math.log(s0 / k) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    return float(k * ndtr(-d2) - s0 * ndtr(-d1))


def bs_call(s0: float, k: float, maturity: float, sigma: float) -> float:
    return bs_put(s0, k, maturity, sigma) + s0 - k


def implied_vol(price: float, s0: float, k: float, maturity: float, tol: float = 1e-13) -> float:
    """Invert :func:`bs_put` by bisection on ``[1e-9, 5]``.

    Raises:
        ValueError: if ``price`` is outside the no-arbitrage band
            ``[(k - s0)^+, k)`` or outside the bracket's price range.
    """
    lo_band = max(k - s0, 0.0)
    if not lo_band <= price < k:
        raise ValueError(f"put price {price} outside no-arbitrage band [{lo_band}, {k})")
    lo, hi = IV_BRACKET
    p_lo, p_hi = bs_put(s0, k, maturity, lo), bs_put(s0, k, maturity, hi)
    if not p_lo <= price <= p_hi:
        raise ValueError(f"put price {price} not bracketed by vols {IV_BRACKET}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bs_put(s0, k, maturity, mid) < price:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def measure_curve_violations(measure: Measure, strikes: Sequence[float], tol: float = 1e-9) -> list[str]:
    """Full property suite for curves generated from ``measure``.

    Shape checks on both curves plus ``P(k) <= k F(k)``, ``C(0) = mean``,
    the Lipschitz bounds ``|P(k2) - P(k1)| <= |k2 - k1| F(max(k1, k2)-)`` and
    ``|C(k2) - C(k1)| <= |k2 - k1| (F(inf) - F(min(k1, k2)))`` for
    neighbouring strikes, and the parity residual.
    """
    put = put_curve(measure, strikes)
    out = curve_violations(put)
    ks = put.strikes
    F = measure.cdf(ks)
    bad = put.values > ks * F + tol
    if np.any(bad):
        out.append(f"put curve exceeds k F(k) at k={ks[np.argmax(bad)]:g}")
    lip = measure.cdf_left(ks[1:]) * np.diff(ks)
    bad = np.abs(np.diff(put.values)) > lip + tol
    if np.any(bad):
        out.append(f"put curve breaks the F(k-) Lipschitz bound at k={ks[1:][np.argmax(bad)]:g}")
    if not measure.finite_mean:
        return out
    call = call_curve(measure, strikes)
    out.extend(curve_violations(call))
    mean = measure.mean()
    if abs(float(call.value(0.0)) - mean) > tol:
        out.append(f"call curve has C(0)={float(call.value(0.0)):g}, expected mean {mean:g}")
    lip_call = (measure.total_mass - measure.cdf(ks[:-1])) * np.diff(ks)
    bad = np.abs(np.diff(call.values)) > lip_call + tol
    if np.any(bad):
        out.append(f"call curve breaks the F(inf) - F(k) Lipschitz bound at k={ks[1:][np.argmax(bad)]:g}")
    gap = parity_gap(put, call, measure.total_mass, mean)
    if np.max(np.abs(gap)) > tol:
        out.append(f"parity residual {np.max(np.abs(gap)):.3g} at k={ks[np.argmax(np.abs(gap))]:g}")
    return out
