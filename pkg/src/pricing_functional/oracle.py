"""Brute-force ground truth: ``π(g) = ∫ g dF`` by direct integration.

Deliberately independent of :mod:`pricing_functional.measure`'s quadrature:
densities are integrated with QUADPACK (``scipy.integrate.quad``) on cells
split at the caller's payoff breakpoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate
from scipy.stats import norm

from pricing_functional.measure import Lognormal, Measure, Tabulated, Uniform


class OracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    tail_budget: float = 1e-16
    limit: int = 500

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.tail_budget <= 0:
            raise ValueError("oracle tolerances must be positive")


def _scalar(g: Callable) -> Callable[[float], float]:
    def h(x: float) -> float:
        return float(np.asarray(g(np.asarray(x, dtype=float))))
    return h


def _density_window(d, cfg: OracleConfig) -> tuple[float, float]:
    if isinstance(d, Lognormal):
        s = d.vol * math.sqrt(d.maturity)
        mu = math.log(d.s0) - 0.5 * s * s
        z = float(norm.isf(cfg.tail_budget)) + 6.0 * s
        return math.exp(mu - z * s), math.exp(mu + z * s)
    if isinstance(d, Tabulated):
        return d.x[0], d.x[-1]
    if isinstance(d, Uniform):
        if math.isinf(d.hi):
            raise OracleError("infinite-mass density")
        return d.lo, d.hi
    raise TypeError(f"unsupported density {type(d).__name__}")


def oracle_price(
    measure: Measure,
    g: Callable,
    config: OracleConfig | None = None,
    breakpoints: Iterable[float] = (),
) -> tuple[float, float]:
    """Return ``(price, error_estimate)`` for payoff ``g`` under ``measure``.

    Atoms are summed exactly. The density part is integrated cell by cell,
    cells split at ``breakpoints`` and at the density's own nodes.

    Raises:
        OracleError: if QUADPACK reports the tolerance was not met.
    """
    cfg = config or OracleConfig()
    gs = _scalar(g)
    price = math.fsum(w * gs(x) for x, w in measure.atoms)
    err = 0.0
    d = measure.density
    if d is not None:
        lo, hi = _density_window(d, cfg)
        cuts = {lo, hi, *(p for p in breakpoints if lo < p < hi)}
        if isinstance(d, Tabulated):
            cuts.update(d.x)
        edges = sorted(cuts)
        pieces = []
        for a, b in zip(edges[:-1], edges[1:]):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, abserr, info, *msg = integrate.quad(
                    lambda x: gs(x) * float(d.pdf(x)),
                    a,
                    b,
                    epsabs=cfg.abs_tol,
                    epsrel=cfg.rel_tol,
                    limit=cfg.limit,
                    full_output=1,
                )
            if msg and abserr > max(cfg.abs_tol, cfg.rel_tol * abs(val)) * 100:
                raise OracleError(f"tolerance not met on [{a}, {b}]: {msg[0]}")
            pieces.append(val)
            err += abserr
        price += math.fsum(pieces)
        if isinstance(d, Lognormal):
            edge = max(abs(gs(lo)), abs(gs(hi)), 1.0)
            err += edge * cfg.tail_budget * d.mass
    return price, err
