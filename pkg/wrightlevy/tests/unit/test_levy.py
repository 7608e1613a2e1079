"""
Unit tests for the Laplace exponents, triplets and related quantities
"""
import math

import numpy as np
import pytest

from wrightlevy.app.core.exceptions import DomainError
from wrightlevy.app.schemas.levy import Compensation, LongTimeBehaviour
from wrightlevy.app.schemas.params import FamilyParams
from wrightlevy.app.services import levy


def _derivative_at_zero(f, h=1e-5):
    return (f(h) - f(-h)) / (2.0 * h)


class TestPsiGamma:
    def test_reference_value(self, gamma_params, reference_values):
        _, value = reference_values["psi_gamma_unit"]
        assert levy.psi_gamma(gamma_params, 1.0) == pytest.approx(float(value), rel=1e-13)

    def test_zero_at_origin(self, gamma_params):
        assert levy.psi_gamma(gamma_params, 0.0) == 0.0

    def test_brownian_limit(self):
        p = FamilyParams(alpha=2.0 - 1e-6, gamma=1.0)
        for lam in (0.5, 1.0, 2.0):
            assert levy.psi_gamma(p, lam) == pytest.approx(levy.brownian_limit_exponent(1.0, lam), rel=1e-4)

    def test_stable_limit(self, gamma_params):
        scaled, target = levy.stable_limit_exponent(gamma_params, 1.0, 1e-8)
        assert scaled == pytest.approx(target, rel=1e-3)

    @pytest.mark.edge_cases
    def test_outside_strip(self, gamma_params):
        with pytest.raises(DomainError):
            levy.psi_gamma(gamma_params, -1.5)

    @pytest.mark.edge_cases
    def test_family_mismatch(self, delta_params):
        with pytest.raises(DomainError):
            levy.psi_gamma(delta_params, 1.0)


class TestPsiDelta:
    def test_two_forms_agree(self, delta_params):
        for lam in (0.3, 1.0, 2.0, 50.0):
            assert levy.psi_delta(delta_params, lam) == pytest.approx(
                levy.psi_delta_from_gamma(delta_params, lam), rel=1e-11
            )

    def test_changes_sign_at_cramer_root(self, delta_params):
        theta = levy.cramer_root(delta_params)
        assert theta == pytest.approx(0.7)
        assert levy.psi_delta(delta_params, theta - 0.01) < 0 < levy.psi_delta(delta_params, theta + 0.01)

    def test_zero_delta_is_stable_exponent(self):
        p = FamilyParams(alpha=1.5, delta=0.0)
        g = FamilyParams(alpha=1.5, gamma=0.0)
        assert levy.psi_delta(p, 1.7) == pytest.approx(levy.psi_gamma(g, 1.7), rel=1e-13)

    def test_mean(self, delta_params):
        slope = _derivative_at_zero(lambda lam: levy.psi_delta(delta_params, lam))
        assert levy.mean_delta(delta_params) == pytest.approx(slope, rel=1e-6)
        assert levy.negative_mean(delta_params)

    def test_log_form(self, delta_params):
        lam = np.array([1.0, 3.0])
        expected = np.log([levy.psi_delta(delta_params, v) for v in lam])
        np.testing.assert_allclose(levy.log_psi_delta(delta_params, lam), expected, rtol=1e-13)

    @pytest.mark.edge_cases
    def test_log_form_needs_positive_values(self, delta_params):
        with pytest.raises(DomainError):
            levy.log_psi_delta(delta_params, np.array([0.1, 1.0]))


class TestLevyDensities:
    def test_positive(self, gamma_params, delta_params):
        y = np.array([-5.0, -1.0, -0.01])
        assert np.all(levy.levy_density_gamma(gamma_params, y) > 0)
        assert np.all(levy.levy_density_delta(delta_params, y) > 0)

    def test_unit_delta_is_shifted_gamma(self):
        # delta = 1 turns e^(alpha y) into e^((alpha - 1) y)
        d = FamilyParams(alpha=1.5, delta=1.0)
        g = FamilyParams(alpha=1.5, gamma=-1.0)
        for y in (-3.0, -0.5, -0.001):
            assert levy.levy_density_delta(d, y) == pytest.approx(levy.levy_density_gamma(g, y), rel=1e-12)

    @pytest.mark.edge_cases
    def test_support(self, gamma_params):
        with pytest.raises(DomainError):
            levy.levy_density_gamma(gamma_params, 0.0)


class TestMoments:
    @pytest.mark.parametrize("g", [0.0, 0.5, -0.5])
    def test_mean_gamma_is_slope(self, g):
        p = FamilyParams(alpha=1.5, gamma=g)
        slope = _derivative_at_zero(lambda lam: levy.psi_gamma(p, lam))
        assert levy.mean_gamma(p) == pytest.approx(slope, rel=1e-6)

    def test_gamma_alpha_root(self):
        root = levy.gamma_alpha_root(1.5)
        assert -1.0 < root < 0.0
        assert levy.mean_gamma(FamilyParams(alpha=1.5, gamma=root)) == pytest.approx(0.0, abs=1e-9)

    def test_cramer_root_gamma_family(self):
        assert levy.gamma_alpha_root(1.5) > -0.95
        p = FamilyParams(alpha=1.5, gamma=-0.95)
        theta = levy.cramer_root(p)
        assert theta > 0
        assert levy.psi_gamma(p, theta) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.edge_cases
    def test_no_cramer_root_for_positive_mean(self, gamma_params):
        with pytest.raises(DomainError):
            levy.cramer_root(gamma_params)
        with pytest.raises(DomainError):
            levy.cramer_root(FamilyParams(alpha=1.5, delta=0.2))


class TestLongTimeClassification:
    def test_delta_family(self):
        assert levy.long_time_classification(FamilyParams(alpha=1.5, delta=0.8)) is LongTimeBehaviour.DRIFTS_TO_MINUS_INF
        assert levy.long_time_classification(FamilyParams(alpha=1.5, delta=0.2)) is LongTimeBehaviour.DRIFTS_TO_PLUS_INF
        assert levy.long_time_classification(FamilyParams(alpha=1.5, delta=1.0 / 3.0)) is LongTimeBehaviour.OSCILLATES

    def test_gamma_family(self, gamma_params):
        assert levy.long_time_classification(gamma_params) is LongTimeBehaviour.DRIFTS_TO_PLUS_INF
        assert (
            levy.long_time_classification(FamilyParams(alpha=1.5, gamma=-0.95))
            is LongTimeBehaviour.DRIFTS_TO_MINUS_INF
        )


class TestTriplets:
    def test_gamma_triplet_rebuilds_exponent(self, gamma_params):
        triplet = levy.triplet_gamma(gamma_params)
        assert triplet.compensation is Compensation.TRUNCATED
        for lam in (0.5, 1.0, 2.0):
            assert levy.exponent_from_triplet(triplet, lam) == pytest.approx(
                levy.psi_gamma(gamma_params, lam), rel=1e-6
            )

    def test_delta_triplet_rebuilds_exponent(self):
        p = FamilyParams(alpha=1.5, delta=1.0)
        triplet = levy.triplet_delta(p)
        assert triplet.compensation is Compensation.FULL
        for lam in (0.5, 2.0):
            assert levy.exponent_from_triplet(triplet, lam) == pytest.approx(levy.psi_delta(p, lam), rel=1e-6)

    @pytest.mark.parametrize("g", [-0.8, 0.0, 1.0])
    def test_surviving_drift_series_rebuilds_exponent(self, g):
        # b = alpha + gamma - 1 of either sign
        p = FamilyParams(alpha=1.5, gamma=g)
        triplet = levy.triplet_gamma(p)
        assert triplet.drift == pytest.approx(levy.drift_tilde(p), rel=1e-12)
        assert levy.exponent_from_triplet(triplet, 1.0) == pytest.approx(levy.psi_gamma(p, 1.0), rel=1e-6)

    def test_drift_series_matches_quadrature(self):
        for g in (0.0, -0.8, 1.0):
            p = FamilyParams(alpha=1.5, gamma=g)
            assert levy.drift_tilde(p) == pytest.approx(levy.drift_tilde_from_mean(p), rel=1e-8)


class TestIntegralIdentity:
    @pytest.mark.parametrize("alpha, g, lam", [(1.5, 0.0, 1.0), (1.2, -0.5, 2.5), (1.9, 1.0, 0.5)])
    def test_quadrature_matches_closed_form(self, alpha, g, lam):
        lhs, rhs = levy.verify_integral_identity(alpha, g, lam)
        assert lhs == pytest.approx(rhs, rel=1e-8)

    @pytest.mark.edge_cases
    def test_domain(self):
        with pytest.raises(DomainError):
            levy.verify_integral_identity(1.5, -1.6, 1.0)
        with pytest.raises(DomainError):
            levy.verify_integral_identity(1.5, 0.0, 0.0)


class TestScaleFunction:
    @pytest.mark.parametrize("g, lam", [(0.0, 1.0), (0.0, 3.0), (-1.0, 2.0)])
    def test_laplace_transform_inverts_exponent(self, g, lam):
        p = FamilyParams(alpha=1.5, gamma=g)
        assert levy.scale_function_laplace(p, lam) == pytest.approx(1.0 / levy.psi_gamma(p, lam), rel=1e-8)

    @pytest.mark.edge_cases
    def test_only_closed_gammas(self):
        with pytest.raises(DomainError):
            levy.scale_function(FamilyParams(alpha=1.5, gamma=0.5), 1.0)


def test_esscher_weight_is_one_at_origin(gamma_params):
    assert levy.esscher_weight(gamma_params, 0.7, 0.0, 0.0) == pytest.approx(1.0)


def test_power_transform_identity_at_unit_power(gamma_params):
    transformed = levy.power_transform(lambda lam: levy.psi_gamma(gamma_params, lam), 1.0, sigma=0.3)
    assert transformed(2.0) == pytest.approx(levy.psi_gamma(gamma_params, 2.0))
    with pytest.raises(DomainError):
        levy.power_transform(math.exp, 0.0)
