"""
Unit tests for the gamma-family and Bessel primitives
"""
import math

import pytest
from scipy import special

from wrightlevy.app.core.exceptions import DomainError, PoleError
from wrightlevy.app.services.specfun import (
    EULER_GAMMA,
    bessel_i,
    digamma,
    gamma,
    incomplete_beta,
    incomplete_beta_quad,
    log_gamma,
    near_pole,
    pochhammer,
    rgamma,
)


class TestGamma:
    def test_half_integer(self, reference_values):
        (arg,), value = reference_values["gamma_half"]
        assert gamma(arg) == pytest.approx(float(value), rel=1e-14)

    def test_third(self, reference_values):
        (arg,), value = reference_values["gamma_third"]
        assert gamma(arg) == pytest.approx(float(value), rel=1e-14)

    def test_negative_non_integer(self):
        # Gamma(-1/2) = -2 sqrt(pi)
        assert gamma(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-14)

    @pytest.mark.edge_cases
    @pytest.mark.parametrize("z", [0.0, -1.0, -3.0, -2.0 + 1e-8])
    def test_poles(self, z):
        with pytest.raises(PoleError):
            gamma(z)

    @pytest.mark.edge_cases
    def test_overflow(self):
        with pytest.raises(OverflowError):
            gamma(200.0)

    @pytest.mark.edge_cases
    def test_non_finite(self):
        with pytest.raises(DomainError):
            gamma(float("nan"))


class TestLogGamma:
    def test_sign_tracked(self):
        lg, sign = log_gamma(-0.5)
        assert sign == -1.0
        assert lg == pytest.approx(math.log(2.0 * math.sqrt(math.pi)), rel=1e-14)

    def test_large_argument(self):
        lg, sign = log_gamma(500.0)
        assert sign == 1.0
        assert lg == pytest.approx(math.lgamma(500.0), rel=1e-15)


class TestRgamma:
    def test_zero_at_poles(self):
        assert rgamma(0.0) == 0.0
        assert rgamma(-4.0) == 0.0

    def test_regular(self):
        assert rgamma(5.0) == pytest.approx(1.0 / 24.0, rel=1e-15)


class TestPochhammer:
    def test_integer_shift(self):
        # (3)_2 = 3 * 4
        assert pochhammer(3.0, 2.0) == pytest.approx(12.0, rel=1e-14)

    def test_matches_gamma_ratio(self):
        assert pochhammer(0.7, 1.5) == pytest.approx(gamma(2.2) / gamma(0.7), rel=1e-13)

    def test_negative_argument(self):
        # (-2.5)_1 = -2.5
        assert pochhammer(-2.5, 1.0) == pytest.approx(-2.5, rel=1e-13)

    @pytest.mark.edge_cases
    def test_denominator_pole_gives_zero(self):
        assert pochhammer(-2.0, 0.5) == 0.0

    @pytest.mark.edge_cases
    def test_both_poles_give_finite_limit(self):
        # Gamma(-1 + e) / Gamma(-2 + e) -> -2
        assert pochhammer(-2.0, 1.0) == pytest.approx(-2.0, rel=1e-14)
        # Gamma(-3 + e) / Gamma(-1 + e) -> 1/6
        assert pochhammer(-1.0, -2.0) == pytest.approx(1.0 / 6.0, rel=1e-14)

    @pytest.mark.edge_cases
    def test_numerator_pole_raises(self):
        with pytest.raises(PoleError):
            pochhammer(0.5, -1.5)


class TestDigamma:
    def test_one(self, reference_values):
        _, value = reference_values["digamma_one"]
        assert digamma(1.0) == pytest.approx(float(value), rel=1e-14)
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, rel=1e-15)

    def test_recurrence(self):
        z = 2.3
        assert digamma(z + 1.0) - digamma(z) == pytest.approx(1.0 / z, rel=1e-13)

    @pytest.mark.edge_cases
    def test_pole(self):
        with pytest.raises(PoleError):
            digamma(-1.0)


class TestIncompleteBeta:
    def test_complete_value(self):
        # B(1; 2, 3) = 1/12
        assert incomplete_beta(1.0, 2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-13)

    def test_polynomial_case(self):
        # int_0^x v dv = x^2 / 2
        assert incomplete_beta(0.4, 2.0, 1.0) == pytest.approx(0.08, rel=1e-13)

    def test_quadrature_agrees(self):
        x, a, b = 1.0 - math.exp(-1.0), 1.5, 0.7
        assert incomplete_beta_quad(x, a, b) == pytest.approx(incomplete_beta(x, a, b), rel=1e-10)

    def test_quadrature_negative_b(self):
        # int_0^x (1 - v)^(-2) dv = x / (1 - x)
        assert incomplete_beta_quad(0.5, 1.0, -1.0) == pytest.approx(1.0, rel=1e-11)

    @pytest.mark.edge_cases
    @pytest.mark.parametrize("x, a, b", [(1.5, 1.0, 1.0), (0.5, 0.0, 1.0), (0.5, 1.0, -0.5)])
    def test_domain(self, x, a, b):
        with pytest.raises(DomainError):
            incomplete_beta(x, a, b)


class TestBesselI:
    @pytest.mark.parametrize("nu, x", [(0.0, 0.3), (0.0, 4.0), (0.5, 2.0), (1.6, 10.0), (2.0, 60.0)])
    def test_matches_scipy(self, nu, x):
        assert bessel_i(nu, x) == pytest.approx(float(special.iv(nu, x)), rel=1e-13)

    def test_zero_argument(self):
        assert bessel_i(0.0, 0.0) == 1.0
        assert bessel_i(1.0, 0.0) == 0.0

    @pytest.mark.edge_cases
    def test_negative_order_blows_up_at_zero(self):
        assert bessel_i(-0.5, 0.0) == math.inf
        assert bessel_i(-0.5, 1e-8) == pytest.approx(float(special.iv(-0.5, 1e-8)), rel=1e-13)
        assert bessel_i(-0.5, 1e-8) > 1e3

    @pytest.mark.edge_cases
    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_i(0.0, -1.0)
        with pytest.raises(DomainError):
            bessel_i(-1.0, 1.0)


def test_near_pole_threshold():
    assert near_pole(-3.0 + 1e-8)
    assert not near_pole(-3.0 + 1e-3)
    assert not near_pole(3.0)
