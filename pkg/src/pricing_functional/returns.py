"""Log-return coordinates: Hermite-function density expansions and theta spreads.

With ``S_T = s0 * exp(sigma * X + m)`` and ``X`` having density ``f``, the put
price is ``P(k) = ∫ (k - S_T(x))^+ f(x) dx``. The put payoff is not square
integrable in ``x``, so ``L2`` approximations ``f_N -> f`` need not give
``P_N(k) -> P(k)``. The theta spread

    theta(x) = (k2 - e^x)^+ - (k2 / k1) (k1 - e^x)^+

is square integrable, so ``<theta, f_N> -> P(k2) - (k2/k1) P(k1)``, and the
correction ``(k2/k1) P(k1)`` vanishes as ``k1 -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from pricing_functional._quadrature import integrate
from pricing_functional.curves import PriceCurve

# Hermite functions decay like exp(-x**2 / 2) past the turning point sqrt(2N + 1)
_HERMITE_PAD = 12.0


def hermite_functions(order: int, x) -> np.ndarray:
    """Orthonormal Hermite functions ``psi_0 .. psi_order`` at ``x``, shape ``(order + 1, *x.shape)``.

    Three-term recurrence on the normalized functions (stable to high order):
    ``psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((order + 1,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if order >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, order):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


@dataclass(frozen=True, eq=False)
class DensityApprox:
    """``f_N(x) = sum_j c_j psi_j((x - loc) / scale) / sqrt(scale)``.

    The basis is orthonormal in ``L2(R)`` for any ``loc`` and ``scale > 0``;
    a Gaussian with mean ``loc`` and standard deviation ``scale`` is exactly
    the order-0 member.
    """

    coefficients: np.ndarray
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).ravel()
        if c.size == 0 or not np.all(np.isfinite(c)):
            raise ValueError("need at least one finite coefficient")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def gaussian(cls, loc: float = 0.0, scale: float = 1.0) -> "DensityApprox":
        """Exact normal density ``N(loc, scale**2)`` as an order-0 expansion."""
        return cls(np.array([np.pi**0.25 / math.sqrt(2 * math.pi)]), loc, scale)

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    def basis(self, x) -> np.ndarray:
        u = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return hermite_functions(self.order, u) / math.sqrt(self.scale)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.tensordot(self.coefficients, self.basis(x), axes=1)

    @property
    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    @property
    def window(self) -> tuple[float, float]:
        """Interval outside which every basis function is below ~1e-30."""
        half = (math.sqrt(2 * self.order + 1) + _HERMITE_PAD) * self.scale
        return self.loc - half, self.loc + half

    def truncate(self, order: int) -> "DensityApprox":
        return DensityApprox(self.coefficients[: order + 1], self.loc, self.scale)


def hermite_project(
    f: Callable,
    order: int,
    loc: float = 0.0,
    scale: float = 1.0,
    points: Iterable[float] = (),
) -> DensityApprox:
    """Coefficients ``c_j = <f, psi_j>`` by adaptive quadrature.

    Raises:
        QuadratureError: if an inner product does not converge.
        ValueError: if ``f`` is not square integrable (norm not finite).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    shell = DensityApprox(np.zeros(order + 1), loc, scale)
    lo, hi = shell.window
    pts = [loc, *points, *density_points(f)]
    sq, _ = integrate(lambda x: np.asarray(f(x), dtype=float) ** 2, -math.inf, math.inf, pts, abs_tol=1e-14)
    if not math.isfinite(sq):
        raise ValueError("density is not square integrable")
    coeffs = np.empty(order + 1)
    for j in range(order + 1):
        def integrand(x, j=j):
            return np.asarray(f(x), dtype=float) * shell.basis(x)[j]
        coeffs[j], _ = integrate(integrand, lo, hi, pts, abs_tol=1e-13, rel_tol=1e-11)
    return DensityApprox(coeffs, loc, scale)


def l2_error(f: Callable, approx: DensityApprox, points: Iterable[float] = ()) -> float:
    """``||f - f_N||_2`` by quadrature of the squared residual."""
    pts = [approx.loc, *points, *density_points(f)]

    def residual(x):
        return (np.asarray(f(x), dtype=float) - approx(x)) ** 2

    val, _ = integrate(residual, -math.inf, math.inf, pts, abs_tol=1e-16, rel_tol=1e-12)
    return math.sqrt(max(val, 0.0))


@dataclass(frozen=True)
class ThetaPayoff:
    """``(k2 - e^x)^+ - (k2 / k1) (k1 - e^x)^+`` in log-return coordinates."""

    k1: float
    k2: float

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0):
            raise ValueError("k1 and k2 must be positive")

    def __call__(self, x):
        e = np.exp(np.asarray(x, dtype=float))
        return np.maximum(self.k2 - e, 0.0) - self.k2 / self.k1 * np.maximum(self.k1 - e, 0.0)

    @property
    def upper(self) -> float:
        """The payoff vanishes for ``x >= upper``."""
        return math.log(max(self.k1, self.k2))

    @property
    def l2_norm(self) -> float:
        val, _ = integrate(
            lambda x: self(x) ** 2, -math.inf, self.upper, (math.log(self.k1), math.log(self.k2)), abs_tol=1e-14
        )
        return math.sqrt(val)


def density_points(f) -> tuple[float, ...]:
    """Locations where ``f`` concentrates its mass, used as quadrature breakpoints.

    DensityApprox contributes its centre; callables may expose a ``points``
    attribute (the Gaussian helpers below do).
    """
    if isinstance(f, DensityApprox):
        return (f.loc,)
    return tuple(float(p) for p in getattr(f, "points", ()))


def _lower_limit(f, upper: float) -> float:
    if isinstance(f, DensityApprox):
        return min(f.window[0], upper - 1.0)
    return -math.inf


def theta_inner(approx: Callable, k1: float, k2: float) -> float:
    """``<theta_{k1,k2}, f_N>``; ``approx`` may be a DensityApprox or any density callable."""
    theta = ThetaPayoff(k1, k2)
    lo = _lower_limit(approx, theta.upper)
    pts = tuple(p for p in (math.log(k1), math.log(k2), *density_points(approx)) if lo < p < theta.upper)
    val, _ = integrate(
        lambda x: theta(x) * np.asarray(approx(x), dtype=float), lo, theta.upper, pts, abs_tol=1e-13, rel_tol=1e-11
    )
    return val


def put_under_density(approx: Callable, k: float, s0: float = 1.0, sigma: float = 1.0, m: float = 0.0) -> float:
    """``∫ (k - s0 e^{sigma x + m})^+ f(x) dx``; the density may be signed."""
    if k <= 0:
        return 0.0
    upper = (math.log(k / s0) - m) / sigma
    lo = _lower_limit(approx, upper)

    def integrand(x):
        payoff = np.maximum(k - s0 * np.exp(sigma * np.asarray(x, dtype=float) + m), 0.0)
        return payoff * np.asarray(approx(x), dtype=float)

    pts = tuple(p for p in density_points(approx) if lo < p < upper)
    val, _ = integrate(integrand, lo, upper, pts, abs_tol=1e-13, rel_tol=1e-11)
    return val


def correction_term(f: Callable, k1: float, k2: float) -> float:
    """``(k2 / k1) P(k1)``, the part of ``<theta, f>`` that vanishes as ``k1 -> 0``."""
    return k2 / k1 * put_under_density(f, k1)


@dataclass(frozen=True, eq=False)
class RecoveryTable:
    """``table[i, j] = <theta_{k1[j], k2}, f_{orders[i]}>``.

    ``estimate`` is the iterated limit (largest order, then smallest k1).
    ``diagonal`` pairs the i-th order with the i-th k1 and is exploratory only.
    """

    k2: float
    orders: tuple[int, ...]
    k1: tuple[float, ...]
    table: np.ndarray
    estimate: float
    diagonal: tuple[float, ...]

    def errors(self, target: float) -> np.ndarray:
        return np.abs(self.table - target)

    def to_rows(self) -> list[dict]:
        return [
            {"order": n, "k1": k1, "theta_inner": float(self.table[i, j])}
            for i, n in enumerate(self.orders)
            for j, k1 in enumerate(self.k1)
        ]


def recover_put(
    approx_sequence: Sequence[DensityApprox], k2: float, k1_sequence: Sequence[float]
) -> RecoveryTable:
    """Tabulate ``<theta_{k1, k2}, f_n>`` over the approximation sequence and decreasing ``k1``."""
    if not approx_sequence or not k1_sequence:
        raise ValueError("need at least one approximation and one k1")
    orders = tuple(a.order for a in approx_sequence)
    if any(b < a for a, b in zip(orders[:-1], orders[1:])):
        raise ValueError("approximation orders must be increasing")
    k1s = tuple(float(k) for k in k1_sequence)
    if any(k <= 0 for k in k1s) or any(b >= a for a, b in zip(k1s[:-1], k1s[1:])):
        raise ValueError("k1 sequence must be positive and strictly decreasing")
    table = np.array([[theta_inner(f, k1, k2) for k1 in k1s] for f in approx_sequence])
    diag = tuple(float(table[i, i]) for i in range(min(table.shape)))
    return RecoveryTable(float(k2), orders, k1s, table, float(table[-1, -1]), diag)


def pushforward_to_price(
    approx: DensityApprox | Callable,
    strikes: Sequence[float],
    s0: float = 1.0,
    sigma: float = 1.0,
    m: float = 0.0,
) -> PriceCurve:
    """Put curve ``P_N(k)`` implied by a return density.

    Curves from expansions that go negative are flagged ``coherent=False``.
    """
    ks = np.asarray(strikes, dtype=float)
    values = np.array([put_under_density(approx, float(k), s0, sigma, m) for k in ks])
    coherent = True
    if isinstance(approx, DensityApprox):
        lo, hi = approx.window
        coherent = bool(np.min(approx(np.linspace(lo, hi, 4001))) >= -1e-12)

    def evaluator(k):
        k = np.asarray(k, dtype=float)
        flat = [put_under_density(approx, float(v), s0, sigma, m) for v in np.atleast_1d(k).ravel()]
        return np.array(flat).reshape(k.shape)

    return PriceCurve(role="put", strikes=ks, values=values, evaluator=evaluator, coherent=coherent)


def gaussian_pdf(loc: float = 0.0, scale: float = 1.0) -> Callable:
    def pdf(x):
        z = (np.asarray(x, dtype=float) - loc) / scale
        return np.exp(-0.5 * z * z) / (scale * math.sqrt(2 * math.pi))
    pdf.points = (loc - scale, loc, loc + scale)
    return pdf


def gaussian_mixture_pdf(components: Sequence[tuple[float, float, float]]) -> Callable:
    """Mixture of ``(weight, loc, scale)`` normal components."""
    parts = [(w, gaussian_pdf(mu, s)) for w, mu, s in components]

    def pdf(x):
        return sum(w * p(x) for w, p in parts)
    pdf.points = tuple(sorted({q for _, p in parts for q in p.points}))
    return pdf
