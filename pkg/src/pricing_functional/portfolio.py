"""Static portfolios of bonds, forwards, puts and calls."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from pricing_functional.curves import PriceCurve
from pricing_functional.measure import Measure

OptionKind = Literal["put", "call"]


@dataclass(frozen=True)
class Option:
    strike: float
    quantity: float
    kind: OptionKind

    def payoff(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "put":
            return self.quantity * np.maximum(self.strike - x, 0.0)
        return self.quantity * np.maximum(x - self.strike, 0.0)


@dataclass(frozen=True)
class Portfolio:
    """``bond_units * 1 + forward_units * x + sum(quantity * option payoff)``."""

    bond_units: float = 0.0
    forward_units: float = 0.0
    options: tuple[Option, ...] = ()

    def payoff(self, x):
        x = np.asarray(x, dtype=float)
        out = self.bond_units + self.forward_units * x
        for opt in self.options:
            out = out + opt.payoff(x)
        return out

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({o.strike for o in self.options}))

    def quantities(self, kind: OptionKind | None = None) -> dict[float, float]:
        out: dict[float, float] = {}
        for o in self.options:
            if kind is None or o.kind == kind:
                out[o.strike] = out.get(o.strike, 0.0) + o.quantity
        return out

    def price(self, measure: Measure) -> float:
        """Exact price under ``measure``."""
        total = self.bond_units * measure.total_mass
        if self.forward_units:
            total += self.forward_units * measure.mean()
        for o in self.options:
            p = measure.put(o.strike) if o.kind == "put" else measure.call(o.strike)
            total += o.quantity * float(p)
        return total

    def price_from_curves(
        self,
        f_infinity: float,
        mean: float | None = None,
        put: PriceCurve | None = None,
        call: PriceCurve | None = None,
    ) -> float:
        """Price from quoted curves; missing legs are filled in by put-call parity."""
        total = self.bond_units * f_infinity
        if self.forward_units:
            if mean is None:
                raise ValueError("forward leg needs the mean")
            total += self.forward_units * mean
        for o in self.options:
            total += o.quantity * _quote(o, f_infinity, mean, put, call)
        return total


def _quote(o: Option, f_inf, mean, put, call) -> float:
    own = put if o.kind == "put" else call
    if own is not None:
        return float(own.value(o.strike))
    other = call if o.kind == "put" else put
    if other is None or mean is None:
        raise ValueError(f"no curve to price a {o.kind} at {o.strike}")
    v = float(other.value(o.strike))
    # C = P - k F(inf) + mean
    if o.kind == "call":
        return v - o.strike * f_inf + mean
    return v + o.strike * f_inf - mean
