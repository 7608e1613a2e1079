"""
Unit tests for the laws of the exponential functionals
"""
import math

import numpy as np
import pytest
from scipy import integrate

from wrightlevy.app.core.exceptions import DomainError
from wrightlevy.app.schemas.params import FamilyParams
from wrightlevy.app.schemas.wright import Method
from wrightlevy.app.services import expfun, levy, verification


@pytest.fixture
def law(delta_params):
    return expfun.ExpFunctionalLaw(delta_params, check_mass=False)


@pytest.fixture
def window_law(window_params):
    return expfun.ExpFunctionalLaw(window_params, check_mass=False)


class TestExpFunctionalLaw:
    def test_constants(self, law, delta_params):
        assert law.k == pytest.approx(delta_params.c * 0.5)
        assert law.a == pytest.approx(2.4)
        assert law.prefactor == pytest.approx(abs(delta_params.M_delta) / math.gamma(2.4))

    @pytest.mark.slow
    def test_mass_checked_on_construction(self, delta_params):
        law = expfun.ExpFunctionalLaw(delta_params)
        assert law.mass == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.edge_cases
    def test_needs_negative_mean(self):
        with pytest.raises(DomainError):
            expfun.ExpFunctionalLaw(FamilyParams(alpha=1.5, delta=0.3))

    @pytest.mark.edge_cases
    def test_needs_delta_family(self, gamma_params):
        with pytest.raises(DomainError):
            expfun.ExpFunctionalLaw(gamma_params)


class TestDensity:
    def test_positive_and_vanishing_at_zero(self, law):
        # linear decay at 0
        slope_far, slope_near = expfun.density(law, 1e-3) / 1e-3, expfun.density(law, 1e-4) / 1e-4
        assert slope_near == pytest.approx(slope_far, rel=1e-2)
        for y in (0.1, 1.0, 10.0):
            assert expfun.density(law, y) > 0

    def test_tail_constant(self, law):
        y = 1e3
        ratio = expfun.density(law, y) * y**law.a / expfun.tail_constant(law)
        assert ratio == pytest.approx(1.0, rel=1e-2)

    @pytest.mark.parametrize("y", [0.5, 1.0, 3.0])
    def test_mixture_representation(self, law, delta_params, y):
        assert expfun.mixture_density(delta_params, y) == pytest.approx(expfun.density(law, y), rel=1e-6)

    def test_error_envelope(self, law):
        result = expfun.density_eval(law, 2.0)
        assert result.abs_err <= 1e-8 * max(1.0, result.value)

    def test_cdf_is_monotone(self, law):
        grid = np.array([0.2, 1.0, 5.0, 50.0])
        table = expfun.density_cdf_table(law, grid)
        assert np.all(np.diff(table) > 0)
        assert table[-1] < 1.0
        assert table[1] == pytest.approx(expfun.density_cdf(law, 1.0), abs=1e-9)

    @pytest.mark.parametrize("alpha, delta, y", [(1.9, 1.2, 1e-3), (1.05, 0.1, 10**-0.5), (1.05, 0.1, 1.0)])
    def test_mixture_fallback_where_wright_fails(self, alpha, delta, y):
        hard = expfun.ExpFunctionalLaw(FamilyParams(alpha=alpha, delta=delta), check_mass=False)
        result = expfun.density_eval(hard, y)
        assert result.method is Method.QUADRATURE
        value = expfun.density(hard, y)
        assert value > 0
        assert value == pytest.approx(expfun.mixture_density(hard.params, y), rel=1e-12)

    @pytest.mark.edge_cases
    def test_needs_positive_argument(self, law):
        with pytest.raises(DomainError):
            expfun.density(law, 0.0)


class TestMoments:
    def test_order_zero_is_mass(self, delta_params):
        assert expfun.moments(delta_params, 1.0) == pytest.approx(1.0, rel=1e-13)

    def test_mean_from_exponent(self, delta_params):
        # E[Sigma] = -1/psi(kappa)
        expected = -1.0 / levy.psi_delta(delta_params, delta_params.kappa)
        assert expfun.moments(delta_params, 2.0) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.edge_cases
    def test_order_range(self, delta_params):
        with pytest.raises(DomainError):
            expfun.moments(delta_params, 2.5)


class TestDufresne:
    def test_brownian_end(self):
        law = expfun.ExpFunctionalLaw(FamilyParams(alpha=2.0 - 1e-8, delta=1.0), check_mass=False)
        for y in (0.3, 1.0, 4.0):
            assert expfun.density(law, y) == pytest.approx(expfun.dufresne_density(1.0, y), rel=1e-4)

    def test_unit_mass(self):
        mass, _ = integrate.quad(lambda y: expfun.dufresne_density(1.5, y), 0.0, math.inf)
        assert mass == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.edge_cases
    def test_domain(self):
        with pytest.raises(DomainError):
            expfun.dufresne_density(0.5, 1.0)
        assert expfun.dufresne_density(1.0, -1.0) == 0.0


class TestLaplaceN:
    def test_origin(self, window_params):
        assert expfun.laplace_N(window_params, 0.0) == 1.0

    @pytest.mark.slow
    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_transform_of_density(self, window_params, window_law, x):
        assert expfun.laplace_N(window_params, x) == pytest.approx(
            expfun.laplace_of_density(window_law, x), rel=1e-6
        )

    @pytest.mark.slow
    @pytest.mark.parametrize("x", [0.5, 2.0])
    def test_mixture_outside_window(self, delta_params, law, x):
        assert expfun.mixture_integral(delta_params, x) == pytest.approx(
            expfun.laplace_of_density(law, x), rel=1e-6
        )

    def test_wright_pieces_agree_with_mixture(self, window_params):
        first, second = expfun.laplace_N_pieces(window_params, 1.0)
        assert first.value - second.value == pytest.approx(
            expfun.mixture_integral(window_params, 1.0), rel=1e-7
        )

    def test_decreasing(self, window_params):
        values = [expfun.laplace_N(window_params, x) for x in (0.1, 1.0, 10.0)]
        assert values[0] > values[1] > values[2] > 0

    def test_large_argument_tail(self, window_params):
        x = 100.0 * window_params.c * window_params.kappa
        ratio = expfun.laplace_N(window_params, x) / expfun.laplace_N_tail(window_params, x)
        assert ratio == pytest.approx(1.0, rel=1e-2)

    def test_eval_reports_wright_route(self, window_params):
        result = expfun.laplace_N_eval(window_params, 1.0)
        assert result.method is Method.SERIES
        assert result.value == expfun.laplace_N(window_params, 1.0)
        assert result.abs_err <= 1e-8 * result.value

    def test_eval_reports_mixture_under_cancellation(self, window_params):
        x = 100.0 * window_params.c * window_params.kappa
        result = expfun.laplace_N_eval(window_params, x)
        assert result.method is Method.QUADRATURE
        assert result.value == pytest.approx(expfun.mixture_integral(window_params, x), rel=1e-12)

    @pytest.mark.edge_cases
    def test_outside_window(self, delta_params):
        with pytest.raises(DomainError):
            expfun.laplace_N(delta_params, 1.0)

    @pytest.mark.edge_cases
    def test_negative_argument(self, window_params):
        with pytest.raises(DomainError):
            expfun.laplace_N(window_params, -1.0)


class TestConstantC:
    @pytest.mark.parametrize("delta", [0.4, 0.5, 0.6])
    def test_product_matches_gamma_ratio(self, delta):
        p = FamilyParams(alpha=1.5, delta=delta)
        value, tail = expfun.constant_C_product(p)
        assert value == pytest.approx(expfun.constant_C(p), rel=1e-3)
        assert tail < 1e-4

    def test_partial_products_converge(self, window_params):
        partial = expfun.constant_C_partial_products(window_params, 2000)
        target = expfun.constant_C(window_params)
        assert abs(partial[-1] - target) < abs(partial[99] - target)

    @pytest.mark.edge_cases
    def test_short_product_rejected(self, window_params):
        with pytest.raises(DomainError):
            expfun.constant_C_product(window_params, n_factors=10)


class TestMode:
    @pytest.mark.parametrize("alpha, delta", [(1.5, 0.5), (1.5, 0.8), (1.8, 0.6)])
    def test_zero_of_mode_function(self, alpha, delta):
        p = FamilyParams(alpha=alpha, delta=delta)
        root = expfun.mode(p)
        assert abs(expfun.mode_function(p, root, 1e-12)) < 1e-8

    def test_density_peaks_at_mode(self, delta_params, law):
        y_star = expfun.density_mode(delta_params)
        peak = expfun.density(law, y_star)
        assert peak > expfun.density(law, 0.9 * y_star)
        assert peak > expfun.density(law, 1.1 * y_star)

    @pytest.mark.parametrize("y", [1e2, 1e3, 1e4])
    def test_log_convex_on_tail(self, law, y):
        assert verification.log_second_difference(law, y, 0.1 * y) >= -1e-8

    def test_not_log_convex_at_mode(self, delta_params, law):
        y_star = expfun.density_mode(delta_params)
        assert verification.log_second_difference(law, y_star, 0.1 * y_star) < 0


class TestLimitLaws:
    def test_linnik_at_kappa_one(self):
        y = 2.0
        assert expfun.linnik_limit_density(1.0, y) == pytest.approx(math.exp(-1.0 / y) / y, rel=1e-12)

    def test_minus_functional_quantile(self):
        kappa = 0.5
        scale = expfun.minus_functional_scale(kappa)
        assert expfun.minus_functional_quantile(kappa, math.exp(-1.0)) == pytest.approx(scale, rel=1e-14)
        t = expfun.minus_functional_quantile(kappa, 0.3)
        assert expfun.minus_functional_cdf(kappa, t) == pytest.approx(0.3, rel=1e-12)

    def test_minus_functional_mean(self):
        kappa = 0.5
        expected = -1.0 / levy.psi_zero(1.5, -kappa)
        assert expfun.minus_functional_mean(kappa) == pytest.approx(expected, rel=1e-12)
        assert expfun.minus_functional_mean(1.0) == math.inf

    @pytest.mark.edge_cases
    def test_quantile_level_range(self):
        with pytest.raises(DomainError):
            expfun.minus_functional_quantile(0.5, 1.0)
