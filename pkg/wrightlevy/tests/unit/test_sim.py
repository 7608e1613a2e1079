"""
Unit tests for the Monte Carlo oracles and the Laplace inversion
"""
import math

import numpy as np
import pytest
from scipy import stats

from wrightlevy.app.core.exceptions import ConfigError, DomainError, HorizonError
from wrightlevy.app.schemas.levy import LevyTriplet
from wrightlevy.app.schemas.params import CbiParams, FamilyParams
from wrightlevy.app.schemas.sim import Direction, SampleSet, SimConfig
from wrightlevy.app.services import cbi, expfun, levy, sim


def _sample_set(values):
    return SampleSet(values=list(values), seed=0, meta={"n_paths": len(values)})


class TestBlockRng:
    def test_reproducible(self):
        first = sim.block_rng(7, 0).random(5)
        again = sim.block_rng(7, 0).random(5)
        np.testing.assert_array_equal(first, again)

    def test_blocks_are_independent_streams(self):
        assert not np.array_equal(sim.block_rng(7, 0).random(5), sim.block_rng(7, 1).random(5))


class TestLaplaceInvert:
    def test_exponential(self):
        grid = [0.5, 1.0, 2.0, 4.0]
        values = sim.laplace_invert(lambda p: 1.0 / (1.0 + p), grid)
        np.testing.assert_allclose(values, np.exp(-np.array(grid)), atol=1e-6)

    def test_ramp(self):
        values = sim.laplace_invert(lambda p: 1.0 / (p * p), [0.3, 3.0])
        np.testing.assert_allclose(values, [0.3, 3.0], rtol=1e-6)

    def test_entrance_law_at_kappa_one(self):
        p = CbiParams(kappa=1.0, delta=1.0)
        law = stats.gamma(a=p.D, scale=p.c)
        grid = [0.3, 1.0, 2.5]
        values = sim.laplace_invert(lambda lam: (1.0 + p.c * lam) ** (-p.D), grid)
        np.testing.assert_allclose(values, law.pdf(grid), atol=1e-6)

    @pytest.mark.edge_cases
    def test_too_few_nodes(self):
        with pytest.raises(DomainError):
            sim.laplace_invert(lambda p: 1.0 / (1.0 + p), [1.0], n_nodes=12)

    @pytest.mark.edge_cases
    def test_positive_grid(self):
        with pytest.raises(DomainError):
            sim.laplace_invert(lambda p: 1.0 / (1.0 + p), [0.0, 1.0])


class TestKsStatistic:
    def test_uniform_sample(self, rng):
        samples = _sample_set(rng.random(2000))
        stat, critical = sim.ks_statistic(samples, lambda v: v)
        assert critical == pytest.approx(1.63 / math.sqrt(2000))
        assert stat < 1.25 * critical

    def test_wrong_law_rejected(self, rng):
        samples = _sample_set(rng.random(1000))
        stat, critical = sim.ks_statistic(samples, lambda v: v * v)
        assert stat == pytest.approx(0.25, abs=0.05)
        assert stat > critical

    @pytest.mark.edge_cases
    def test_needs_enough_samples(self, rng):
        with pytest.raises(DomainError):
            sim.ks_statistic(_sample_set(rng.random(50)), lambda v: v)


class TestPositiveStable:
    def test_degenerate_at_kappa_one(self, rng):
        np.testing.assert_array_equal(sim.positive_stable(1.0, 4, rng), np.ones(4))

    @pytest.mark.parametrize("kappa", [0.3, 0.5, 0.8])
    def test_laplace_transform(self, kappa, rng):
        draws = sim.positive_stable(kappa, 20000, rng)
        assert np.all(draws > 0)
        for lam in (0.5, 2.0):
            weights = np.exp(-lam * draws)
            se = weights.std(ddof=1) / math.sqrt(draws.size)
            assert abs(weights.mean() - math.exp(-(lam**kappa))) < 4 * se

    @pytest.mark.edge_cases
    def test_kappa_range(self, rng):
        with pytest.raises(DomainError):
            sim.positive_stable(1.2, 4, rng)


class TestAbsorptionTimes:
    def test_exact_law(self, branching_params):
        cfg = SimConfig(n_paths=4000, seed=11)
        samples = sim.sample_absorption_time(branching_params, 1.5, cfg)
        stat, critical = sim.ks_statistic(samples, lambda t: cbi.absorption_cdf(branching_params, 1.5, t))
        assert stat < 1.25 * critical
        assert samples.meta["sampler"] == "exact"

    def test_prefix_stable_in_path_count(self, branching_params):
        short = sim.sample_absorption_time(branching_params, 1.0, SimConfig(n_paths=200, seed=5))
        long = sim.sample_absorption_time(branching_params, 1.0, SimConfig(n_paths=2500, seed=5))
        assert long.values[:200] == short.values

    @pytest.mark.edge_cases
    def test_needs_pure_branching(self, cbi_params, small_sim_config):
        with pytest.raises(DomainError):
            sim.sample_absorption_time(cbi_params, 1.0, small_sim_config)

    @pytest.mark.edge_cases
    def test_needs_positive_start(self, branching_params, small_sim_config):
        with pytest.raises(DomainError):
            sim.sample_absorption_time(branching_params, 0.0, small_sim_config)


class TestSimulateLevy:
    def test_skeleton_shape(self, gamma_params, small_sim_config):
        paths = sim.simulate_levy(levy.triplet_gamma(gamma_params), small_sim_config)
        assert paths.values.shape == (200, small_sim_config.n_steps + 1)
        assert np.all(paths.values[:, 0] == 0.0)
        assert paths.meta["n_paths"] == 200
        assert paths.meta["jump_rate"] > 0

    def test_reproducible(self, gamma_params, small_sim_config):
        triplet = levy.triplet_gamma(gamma_params)
        first = sim.simulate_levy(triplet, small_sim_config)
        again = sim.simulate_levy(triplet, small_sim_config)
        np.testing.assert_array_equal(first.values, again.values)

    @pytest.mark.slow
    def test_mean_drift(self, gamma_params):
        cfg = SimConfig(n_paths=4000, horizon=1.0, step=0.01, seed=3)
        paths = sim.simulate_levy(levy.triplet_gamma(gamma_params), cfg)
        ends = paths.values[:, -1]
        se = ends.std(ddof=1) / math.sqrt(ends.size)
        assert abs(ends.mean() - levy.mean_gamma(gamma_params)) < 5 * se + 0.02

    @pytest.mark.edge_cases
    def test_rejects_diffusion(self, small_sim_config):
        triplet = LevyTriplet(drift=0.0, diffusion=1.0, levy_density=lambda y: np.exp(y), mean=0.0)
        with pytest.raises(ConfigError):
            sim.simulate_levy(triplet, small_sim_config)


class TestExponentialFunctional:
    def test_infinite_direction_rejected(self, delta_params, small_sim_config):
        with pytest.raises(DomainError):
            sim.sample_exponential_functional(delta_params, Direction.MINUS_KAPPA, small_sim_config)

    def test_horizon_too_short(self, delta_params):
        cfg = SimConfig(n_paths=100, horizon=2.0, step=0.05, seed=1)
        with pytest.raises(HorizonError):
            sim.sample_exponential_functional(delta_params, Direction.PLUS_KAPPA, cfg)

    @pytest.mark.slow
    def test_reproducible_draws(self, delta_params):
        cfg = SimConfig(n_paths=100, horizon=200.0, step=0.05, seed=9)
        first = sim.sample_exponential_functional(delta_params, Direction.PLUS_KAPPA, cfg)
        again = sim.sample_exponential_functional(delta_params, Direction.PLUS_KAPPA, cfg)
        assert first.values == again.values
        assert all(v > 0 for v in first.values)
        assert first.meta["max_tail_ratio"] < sim.TAIL_REL_TOL
        assert first.meta["direction"] == "plus_kappa"

    @pytest.mark.slow
    def test_jump_truncation_refinement(self):
        p = FamilyParams(alpha=1.5, gamma=0.0)
        stats_by_eps = []
        for eps_jump in (0.05, 0.025):
            cfg = SimConfig(n_paths=2000, eps_jump=eps_jump, seed=12)
            samples = sim.sample_exponential_functional(p, Direction.MINUS_KAPPA, cfg)
            stat, critical = sim.ks_statistic(samples, lambda v: expfun.minus_functional_cdf(p.kappa, v))
            stats_by_eps.append(stat)
        # halving the truncation moves the KS distance by less than the sampling noise
        assert abs(stats_by_eps[0] - stats_by_eps[1]) < critical


class TestEntranceLawSampler:
    @pytest.mark.slow
    def test_gamma_law_at_kappa_one(self):
        p = CbiParams(kappa=1.0, delta=1.0)
        t = 2.0
        samples = sim.sample_entrance_law(p, t, SimConfig(n_paths=2000, seed=4))
        law = stats.gamma(a=p.D, scale=p.c * t)
        stat, critical = sim.ks_statistic(samples, lambda y: float(law.cdf(y)))
        assert stat < 1.25 * critical
        assert samples.meta["tabulated_mass"] == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.edge_cases
    def test_needs_immigration(self, branching_params, small_sim_config):
        with pytest.raises(DomainError):
            sim.sample_entrance_law(branching_params, 1.0, small_sim_config)


class TestEsscherReweighting:
    def test_zero_tilt_is_plain_mean(self, gamma_params):
        cfg = SimConfig(n_paths=300, horizon=1.0, step=0.05, seed=2)
        mean, se, mean_weight = sim.esscher_reweighted_mean(gamma_params, 0.0, 1.0, cfg)
        assert mean_weight == pytest.approx(1.0, rel=1e-14)
        assert se > 0
        assert math.isfinite(mean)

    @pytest.mark.slow
    def test_tilted_mean(self):
        target = FamilyParams(alpha=1.5, gamma=0.5)
        cfg = SimConfig(n_paths=5000, horizon=1.0, step=0.01, seed=6)
        mean, se, _ = sim.esscher_reweighted_mean(target, 0.5, 1.0, cfg)
        assert abs(mean - levy.mean_gamma(target)) < 5 * se + 0.02
