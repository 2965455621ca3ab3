"""File formats: measure/payoff/density JSON, curve CSV with a metadata sidecar.

Measure JSON::

    {"atoms": [[x, w], ...],
     "density": {"family": "lognormal", "s0": 1, "vol": 0.2, "maturity": 1, "mass": 1}
              | {"family": "table", "x": [...], "y": [...]},
     "finite_mean": true,
     "total_mass": 1.0}

Payoff JSON (span end ``null`` means +inf)::

    {"pieces": [{"span": [a, b], "g0_at_a": 0, "slope0_at_a": 0,
                 "curvature": {"atoms": [[k, w], ...],
                               "density": {"family": "constant", "value": 2, "lo": 0, "hi": null}
                                        | {"family": "table", "x": [...], "y": [...]}}}]}

Curve CSV: header ``strike,price``, one sorted row per strike. Sidecar JSON:
``{"role": "put"|"call", "f_infinity": ..., "mean": ...}``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from pricing_functional.curves import PriceCurve
from pricing_functional.measure import Lognormal, Measure, StieltjesMeasure, Tabulated, Uniform
from pricing_functional.portfolio import Portfolio
from pricing_functional.replication import DCPayoff, DCPiece, PiecewiseDCPayoff


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LognormalSpec(_Strict):
    family: Literal["lognormal"]
    s0: float = Field(gt=0)
    vol: float = Field(gt=0)
    maturity: float = Field(gt=0)
    mass: float = Field(default=1.0, ge=0)


class TableSpec(_Strict):
    family: Literal["table"]
    x: list[float]
    y: list[float]


class ConstantSpec(_Strict):
    family: Literal["constant"]
    value: float
    lo: float = 0.0
    hi: float | None = None


DensitySpec = Annotated[Union[LognormalSpec, TableSpec], Field(discriminator="family")]
CurvatureDensitySpec = Annotated[Union[ConstantSpec, TableSpec], Field(discriminator="family")]


class MeasureSpec(_Strict):
    atoms: list[tuple[float, float]] = []
    density: DensitySpec | None = None
    finite_mean: bool = True
    total_mass: float | None = None

    def build(self) -> Measure:
        return Measure(
            atoms=tuple(self.atoms),
            density=_density(self.density),
            finite_mean=self.finite_mean,
            total_mass_cap=self.total_mass,
        )


class CurvatureSpec(_Strict):
    atoms: list[tuple[float, float]] = []
    density: CurvatureDensitySpec | None = None

    def build(self) -> StieltjesMeasure:
        return StieltjesMeasure(atoms=tuple(self.atoms), density=_density(self.density))


class PieceSpec(_Strict):
    span: tuple[float, float | None]
    g0_at_a: float = 0.0
    slope0_at_a: float = 0.0
    curvature: CurvatureSpec = CurvatureSpec()


class PayoffSpec(_Strict):
    pieces: list[PieceSpec] = Field(min_length=1)

    def build(self) -> DCPayoff | PiecewiseDCPayoff:
        """A single piece spanning ``[0, inf)`` is a global DC payoff."""
        if len(self.pieces) == 1 and self.pieces[0].span[0] == 0 and self.pieces[0].span[1] is None:
            p = self.pieces[0]
            return DCPayoff(p.g0_at_a, p.slope0_at_a, p.curvature.build())
        return PiecewiseDCPayoff(
            tuple(
                DCPiece(
                    p.span[0],
                    math.inf if p.span[1] is None else p.span[1],
                    p.g0_at_a,
                    p.slope0_at_a,
                    p.curvature.build(),
                )
                for p in self.pieces
            )
        )


class CurveMeta(_Strict):
    role: Literal["put", "call"]
    f_infinity: float | None = None
    mean: float | None = None


class ReturnDensitySpec(_Strict):
    """Return-space density for the ``converge`` command."""

    family: Literal["gaussian", "mixture"]
    loc: float = 0.0
    scale: float = Field(default=1.0, gt=0)
    components: list[tuple[float, float, float]] = []


def _density(spec):
    if spec is None:
        return None
    if isinstance(spec, LognormalSpec):
        return Lognormal(spec.s0, spec.vol, spec.maturity, spec.mass)
    if isinstance(spec, TableSpec):
        return Tabulated(tuple(spec.x), tuple(spec.y))
    return Uniform(spec.value, spec.lo, math.inf if spec.hi is None else spec.hi)


def load_measure(path: str | Path) -> Measure:
    return MeasureSpec.model_validate_json(Path(path).read_text()).build()


def load_payoff(path: str | Path) -> DCPayoff | PiecewiseDCPayoff:
    return PayoffSpec.model_validate_json(Path(path).read_text()).build()


def load_return_density(path: str | Path) -> ReturnDensitySpec:
    return ReturnDensitySpec.model_validate_json(Path(path).read_text())


def sidecar_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def read_table(path: str | Path, columns: tuple[str, ...]) -> np.ndarray:
    """Read a headed numeric CSV; the header must be exactly ``columns``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != columns:
            raise ValueError(f"{path}: expected header {','.join(columns)}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(columns):
                raise ValueError(f"{path}:{lineno}: expected {len(columns)} fields")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
    return np.array(rows, dtype=float).reshape(-1, len(columns))


def write_table(path, columns: tuple[str, ...], rows) -> None:
    fh = open(path, "w", newline="") if isinstance(path, (str, Path)) else path
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    finally:
        if isinstance(path, (str, Path)):
            fh.close()


def read_curve(path: str | Path, meta_path: str | Path | None = None) -> PriceCurve:
    data = read_table(path, ("strike", "price"))
    if data.shape[0] == 0:
        raise ValueError(f"{path}: no rows")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ValueError(f"{path}: strikes must be sorted and distinct")
    meta_file = Path(meta_path) if meta_path else sidecar_path(path)
    meta = CurveMeta.model_validate_json(meta_file.read_text())
    return PriceCurve(meta.role, data[:, 0], data[:, 1], meta.f_infinity, meta.mean)


def write_curve(curve: PriceCurve, path, meta_path: str | Path | None = None) -> None:
    write_table(path, ("strike", "price"), zip(curve.strikes, curve.values))
    if meta_path is not None:
        meta = CurveMeta(role=curve.role, f_infinity=curve.f_infinity, mean=curve.mean)
        Path(meta_path).write_text(meta.model_dump_json(indent=2) + "\n")


def portfolio_to_dict(p: Portfolio) -> dict:
    return {
        "bond_units": p.bond_units,
        "forward_units": p.forward_units,
        "options": [{"strike": o.strike, "quantity": o.quantity, "kind": o.kind} for o in p.options],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
