from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy.stats import lognorm

from conftest import PHI_01, lognormal, mixture, tabulated, two_atom
from pricing_functional._quadrature import QuadratureError, integrate
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


class TestCdf:
    def test_point_mass_right_continuous(self):
        m = Measure(atoms=((1.0, 1.0),))
        assert cdf(m, 0.999) == 0.0
        assert cdf(m, 1.0) == 1.0

    def test_lognormal_at_one(self):
        assert cdf(lognormal(), 1.0) == pytest.approx(PHI_01, abs=1e-15)

    def test_lognormal_against_scipy(self):
        x = np.linspace(0.1, 3.0, 30)
        ref = lognorm(s=0.2, scale=math.exp(-0.02)).cdf(x)
        np.testing.assert_allclose(cdf(lognormal(), x), ref, atol=1e-14)

    def test_sub_probability(self):
        m = two_atom()
        assert cdf(m, 1.5) == pytest.approx(0.4)
        assert cdf(m, math.inf) == pytest.approx(0.9)
        assert m.total_mass == pytest.approx(0.9)

    def test_negative_argument_is_zero(self):
        assert cdf(mixture(), -1.0) == 0.0

    def test_left_limits(self):
        assert cdf_left(Measure(atoms=((1.0, 1.0),)), 1.0) == 0.0
        assert cdf_left(two_atom(), 2.0) == pytest.approx(0.4)
        x = np.linspace(0.2, 3.0, 15)
        np.testing.assert_array_equal(cdf_left(lognormal(), x), cdf(lognormal(), x))

    def test_jump_equals_atom_weight(self):
        m = mixture()
        assert cdf(m, 1.0) - cdf_left(m, 1.0) == pytest.approx(0.25, abs=1e-15)

    def test_survival_matches_complement(self, any_measure):
        x = np.linspace(0.0, 3.0, 31)
        np.testing.assert_allclose(any_measure.survival(x), any_measure.total_mass - any_measure.cdf(x), atol=1e-14)
        np.testing.assert_allclose(
            any_measure.survival_left(x), any_measure.total_mass - any_measure.cdf_left(x), atol=1e-14
        )


class TestMean:
    def test_point_mass(self):
        assert mean(Measure(atoms=((2.5, 1.0),))) == 2.5

    def test_two_atoms(self):
        assert mean(two_atom()) == pytest.approx(1.4, abs=1e-15)

    def test_lognormal_is_forward(self):
        assert mean(lognormal()) == pytest.approx(1.0, abs=1e-14)

    def test_matches_stieltjes_integral(self, any_measure):
        direct = stieltjes_integrate(lambda x: x, any_measure, Interval())
        assert mean(any_measure) == pytest.approx(direct, abs=1e-9)

    def test_requires_finite_mean_flag(self):
        with pytest.raises(ValueError):
            mean(Measure(atoms=((1.0, 1.0),), finite_mean=False))


class TestValidation:
    def test_rejects_unsorted_duplicate_or_nonpositive_atoms(self):
        with pytest.raises(ValueError):
            Measure(atoms=((1.0, 0.5), (1.0, 0.2)))
        with pytest.raises(ValueError):
            Measure(atoms=((1.0, -0.5),))
        with pytest.raises(ValueError):
            Measure(atoms=((-1.0, 0.5),))

    def test_rejects_negative_table(self):
        with pytest.raises(ValueError):
            Measure(density=Tabulated((0.0, 1.0, 2.0), (0.0, -0.1, 0.0)))

    def test_total_mass_cap(self):
        Measure(atoms=((1.0, 0.4),), density=Lognormal(1, 0.2, 1, mass=0.5), total_mass_cap=0.9)
        with pytest.raises(ValueError):
            Measure(atoms=((1.0, 0.4),), total_mass_cap=0.9)

    def test_infinite_mass_rejected(self):
        with pytest.raises(ValueError):
            Measure(density=Uniform(1.0))


class TestStieltjesIntegrate:
    def test_unit_function_gives_mass(self):
        assert stieltjes_integrate(lambda x: np.ones_like(x), two_atom(), Interval(0.0, math.inf)) == pytest.approx(0.9)

    def test_identity_on_lebesgue_unit_interval(self):
        leb = StieltjesMeasure(density=Uniform(1.0))
        assert stieltjes_integrate(lambda x: x, leb, Interval(0.0, 1.0)) == pytest.approx(0.5, abs=1e-14)

    def test_call_curve_of_point_mass_against_square_curvature(self):
        delta2 = Measure(atoms=((2.0, 1.0),))
        nu = StieltjesMeasure(density=Uniform(2.0))
        val = stieltjes_integrate(delta2.call, nu, Interval(0.0, math.inf), breakpoints=(2.0,))
        assert val == pytest.approx(4.0, abs=1e-12)

    def test_endpoint_conventions_at_atoms(self):
        m = two_atom()
        f = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
        assert stieltjes_integrate(f, m, Interval(1.0, 2.0)) == pytest.approx(0.5)
        assert stieltjes_integrate(f, m, Interval.closed(1.0, 2.0)) == pytest.approx(0.9)
        assert stieltjes_integrate(f, m, Interval.open(1.0, 2.0)) == 0.0
        assert stieltjes_integrate(f, m, Interval.right_open(1.0, 2.0)) == pytest.approx(0.4)

    def test_additive_over_adjacent_cells(self):
        m = Measure(atoms=((0.5, 0.1), (1.0, 0.2), (1.5, 0.3), (2.0, 0.25)))
        f = lambda x: np.sin(np.asarray(x)) + 2.0  # noqa: E731
        whole = stieltjes_integrate(f, m, Interval(0.0, 3.0))
        parts = stieltjes_integrate(f, m, Interval(0.0, 1.0)) + stieltjes_integrate(f, m, Interval(1.0, 3.0))
        assert whole == pytest.approx(parts, abs=1e-12)

    def test_tabulated_density_against_scipy(self):
        m = tabulated()
        ref, _ = sp_integrate.quad(lambda x: math.cos(x) * float(m.density.pdf(x)), 0, 2.5, points=[0.5, 1, 1.5])
        assert stieltjes_integrate(np.cos, m, Interval()) == pytest.approx(ref, abs=1e-10)

    @pytest.mark.filterwarnings("ignore:divide by zero")
    def test_undefined_at_atom_raises(self):
        with pytest.raises(ValueError):
            stieltjes_integrate(lambda x: 1.0 / (np.asarray(x) - 1.0), two_atom(), Interval())

    def test_monotone_truncation(self):
        m = lognormal()
        f = lambda x: np.asarray(x, dtype=float) ** 2  # noqa: E731
        vals = [stieltjes_integrate(f, m, Interval(0.0, float(n))) for n in (1, 2, 3, 4, 6)]
        full = stieltjes_integrate(f, m, Interval())
        assert all(b >= a for a, b in zip(vals[:-1], vals[1:]))
        assert vals[-1] <= full + 1e-12
        assert full == pytest.approx(math.exp(0.04), abs=1e-10)


class TestSignedMeasure:
    def test_parts_of_signed_table(self):
        nu = StieltjesMeasure(density=Tabulated((0.0, 1.0, 2.0, 3.0), (1.0, -1.0, 1.0, 0.0)))
        pos, neg = nu.parts()
        assert pos.is_positive and neg.is_positive
        for iv in (Interval(0.0, 0.7), Interval(0.2, 2.5), Interval()):
            assert pos.mass(iv) - neg.mass(iv) == pytest.approx(nu.mass(iv), abs=1e-14)
        assert nu.total_variation() == pytest.approx(pos.mass() + neg.mass())

    def test_signed_atoms(self):
        nu = StieltjesMeasure(atoms=((1.0, 2.0), (2.0, -1.0)))
        pos, neg = nu.parts()
        assert pos.atoms == ((1.0, 2.0),)
        assert neg.atoms == ((2.0, 1.0),)
        assert not nu.is_positive

    def test_restrict(self):
        nu = StieltjesMeasure(atoms=((1.0, 1.0), (2.0, 1.0)), density=Uniform(1.0, 0.0, 5.0))
        r = nu.restrict(Interval.open(0.5, 2.0))
        assert r.mass() == pytest.approx(1.0 + 1.5)


class TestQuadrature:
    def test_polynomial_exact(self):
        val, err = integrate(lambda x: x**7 - 3 * x**2, 0.0, 2.0)
        assert val == pytest.approx(2**8 / 8 - 8, abs=1e-13)
        assert err < 1e-10

    def test_infinite_interval(self):
        val, _ = integrate(lambda x: np.exp(-x * x), -math.inf, math.inf)
        assert val == pytest.approx(math.sqrt(math.pi), abs=1e-10)

    def test_breakpoints_help_kinks(self):
        val, _ = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0, points=(0.3,))
        assert val == pytest.approx(0.045 + 0.245, abs=1e-14)

    @pytest.mark.filterwarnings("ignore:divide by zero")
    def test_nonfinite_raises(self):
        with pytest.raises(QuadratureError):
            integrate(lambda x: 1.0 / x, -1.0, 1.0)

    def test_scalar_only_callable(self):
        val, _ = integrate(lambda x: math.sin(x), 0.0, math.pi)
        assert val == pytest.approx(2.0, abs=1e-12)
