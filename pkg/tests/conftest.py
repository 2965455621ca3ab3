"""Shared fixtures: the measure suite, payoff suite and frozen reference values.

Frozen numbers were produced with 30-digit mpmath evaluations of the closed
forms named next to each constant; the package never computes them this way.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from pricing_functional.measure import Lognormal, Measure, StieltjesMeasure, Tabulated, Uniform
from pricing_functional.replication import DCPayoff

# Zero-rate Black-Scholes, S0=1, K=1, T=1, sigma=0.2 (mpmath ncdf)
BS_PUT_ATM = 0.079655674554057967
# Phi(0.1): lognormal(1, 0.2, 1) distribution function at 1
PHI_01 = 0.53982783727702898
# Zero-rate Black-Scholes put, S0=1, K=1.1, T=1, sigma=0.2
BS_PUT_110 = 0.14292010941409895
# E[S^2] = exp(sigma^2 T) for lognormal(1, 0.2, 1)
LN_SECOND_MOMENT = 1.0408107741923882
# E[(1 - e^X)^+] for X ~ N(0, 1): Phi(0) - e^{1/2} Phi(-1)
GAUSS_RETURN_PUT_1 = 0.23842170813487663
# <theta_{k1, 1}, phi> for the standard normal density phi (mpmath quad)
THETA_STANDARD = {0.5: 0.14340278182006998, 0.25: 0.21171276772213623, 0.1: 0.23566782023162305, 0.05: 0.23811611062993275}


def two_atom() -> Measure:
    return Measure(atoms=((1.0, 0.4), (2.0, 0.5)))


def three_atom() -> Measure:
    return Measure(atoms=((0.5, 0.2), (1.25, 0.3), (2.5, 0.45)))


def lognormal() -> Measure:
    return Measure(density=Lognormal(1.0, 0.2, 1.0))


def mixture() -> Measure:
    """Atom at the money plus a scaled lognormal body."""
    return Measure(atoms=((1.0, 0.25),), density=Lognormal(1.1, 0.3, 1.0, mass=0.7))


def tabulated() -> Measure:
    return Measure(density=Tabulated((0.0, 0.5, 1.0, 1.5, 2.5), (0.0, 0.6, 1.0, 0.4, 0.0)))


MEASURES = {
    "two_atom": two_atom,
    "three_atom": three_atom,
    "lognormal": lognormal,
    "mixture": mixture,
    "tabulated": tabulated,
}
ATOMIC = {"two_atom", "three_atom"}


def square() -> DCPayoff:
    return DCPayoff(0.0, 0.0, StieltjesMeasure(density=Uniform(2.0)), evaluator=lambda x: np.asarray(x) ** 2)


def call_payoff(k: float = 1.0) -> DCPayoff:
    return DCPayoff(0.0, 0.0, StieltjesMeasure(atoms=((k, 1.0),)), evaluator=lambda x: np.maximum(np.asarray(x) - k, 0.0))


def quartic_tabulated() -> DCPayoff:
    """Curvature 12 k^2 sampled on a grid and interpolated linearly; affine past 12."""
    grid = np.linspace(0.0, 12.0, 97)
    return DCPayoff(0.0, 0.0, StieltjesMeasure(density=Tabulated(tuple(grid), tuple(12 * grid**2))))


def exp_tabulated() -> DCPayoff:
    """``g(0) = 1, g'(0) = 1`` and curvature ``e^k`` on ``[0, 8]``: exponential-like."""
    grid = np.linspace(0.0, 8.0, 65)
    return DCPayoff(1.0, 1.0, StieltjesMeasure(density=Tabulated(tuple(grid), tuple(np.exp(grid)))))


CONVEX_PAYOFFS = {
    "square": square,
    "call_1": call_payoff,
    "quartic_tab": quartic_tabulated,
    "exp_tab": exp_tabulated,
}

STRIKES = np.round(np.arange(0.0, 12.0 + 1e-9, 0.05), 10)


@pytest.fixture(params=sorted(MEASURES))
def measure_name(request):
    return request.param


@pytest.fixture
def any_measure(measure_name):
    return MEASURES[measure_name]()


def bs_put_reference(s0, k, t, sigma):
    """Independent Black-Scholes put via math.erfc."""
    s = sigma * math.sqrt(t)
    d1 = (math.log(s0 / k) + 0.5 * s * s) / s
    d2 = d1 - s
    cdf = lambda z: 0.5 * math.erfc(-z / math.sqrt(2))  # noqa: E731
    return k * cdf(-d2) - s0 * cdf(-d1)


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
