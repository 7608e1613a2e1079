"""
Monte Carlo oracles

Spectrally negative Levy paths by jump truncation, exponential functionals
along the paths, exact absorption times, fixed Talbot Laplace inversion and
the Kolmogorov-Smirnov distance.

Random streams: paths are grouped in blocks of BLOCK_PATHS; block b draws from
numpy's PCG64 seeded by SeedSequence(seed, spawn_key=(b,)). Path i therefore
always sees the same numbers whatever the number of paths requested.
"""
import math
import warnings
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, interpolate

from wrightlevy.app.core.exceptions import (
    ConfigError,
    ConvergenceError,
    DomainError,
    HorizonError,
)
from wrightlevy.app.core.logging import get_logger
from wrightlevy.app.schemas.levy import Compensation, LevyTriplet
from wrightlevy.app.schemas.params import CbiParams, Family, FamilyParams
from wrightlevy.app.schemas.sim import Direction, PathSample, SampleSet, SimConfig
from wrightlevy.app.services import levy
from wrightlevy.app.services.cbi import entrance_density

logger = get_logger("wrightlevy.app.services.sim")

BLOCK_PATHS = 1000
TABLE_POINTS = 20001
TAIL_REL_TOL = 1e-6
MIN_STOP_TIME = 1.0


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _blocks(n_paths: int) -> Iterator[Tuple[int, int, int]]:
    for b, start in enumerate(range(0, n_paths, BLOCK_PATHS)):
        yield b, start, min(start + BLOCK_PATHS, n_paths)


class JumpTable:
    """
    Large jumps of a Levy density on (-inf, -eps]: total rate, mean, the
    truncated second moment of the small jumps and an inverse-CDF table.
    """

    def __init__(self, triplet: LevyTriplet, eps: float):
        self.eps = eps
        density = triplet.levy_density
        self.small_variance = self._small_second_moment(density, eps)

        # |y| on a geometric grid from eps until the tail is negligible
        far = self._far_end(density, eps)
        radii = np.geomspace(eps, far, TABLE_POINTS)
        values = np.asarray(density(-radii), dtype=float)
        cumulative = integrate.cumulative_trapezoid(values, radii, initial=0.0)
        self.rate = float(cumulative[-1])
        self.tail_cut_mass = self._tail_mass(density, far)
        if self.rate <= 0.0:
            self.mean_jump = 0.0
            self._inverse = None
        else:
            self.mean_jump = -float(integrate.trapezoid(radii * values, radii)) / self.rate
            probs, keep = np.unique(cumulative / self.rate, return_index=True)
            self._inverse = interpolate.interp1d(
                probs, radii[keep], bounds_error=False, fill_value=(eps, far), assume_sorted=True
            )
        self.compensator = self._compensator(density, triplet.compensation, eps)

    @staticmethod
    def _small_second_moment(density, eps: float) -> float:
        """
        int_(-eps)^0 y^2 nu(dy) = int_0^eps u^(1-alpha) [u^(alpha+1) nu(-u)] du,
        with the index alpha + 1 read off the density near 0
        """
        u1, u2 = 1e-7 * eps, 1e-6 * eps
        if float(density(-u1)) == 0.0:
            return 0.0
        index = math.log(float(density(-u1)) / float(density(-u2))) / math.log(u2 / u1)
        power = 2.0 - index
        if power <= -1.0:
            raise ConfigError(f"small jumps have infinite second moment (index {index:.3f})")

        def regular(u: float) -> float:
            return float(density(-u)) * u**index if u > 0 else float(density(-u1)) * u1**index

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, _ = integrate.quad(
                regular, 0.0, eps, weight="alg", wvar=(power, 0.0), epsabs=1e-14, epsrel=1e-10, limit=400
            )
        return value

    @staticmethod
    def _far_end(density, eps: float) -> float:
        far = max(2.0 * eps, 1.0)
        ref = float(density(-eps))
        while float(density(-far)) > 1e-16 * ref and far < 1e4:
            far *= 2.0
        return far

    @staticmethod
    def _tail_mass(density, far: float) -> float:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, _ = integrate.quad(lambda y: float(density(y)), -math.inf, -far, limit=100)
        return value

    @staticmethod
    def _compensator(density, compensation: Compensation, eps: float) -> float:
        """int y nu(dy) over the compensated jumps of size at least eps"""
        lower = -math.inf if compensation is Compensation.FULL else -1.0
        if lower >= -eps:
            return 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, _ = integrate.quad(lambda y: y * float(density(y)), lower, -eps, limit=400)
        return value

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Negative jump sizes for uniforms u"""
        if self._inverse is None:
            return np.zeros_like(u)
        return -self._inverse(u)


class LevyStepper:
    """Increments of a truncated Levy path over one time step, for a block of paths"""

    def __init__(self, triplet: LevyTriplet, cfg: SimConfig):
        if triplet.diffusion != 0.0:
            raise ConfigError("path simulation supports sigma = 0 only")
        self.triplet = triplet
        self.cfg = cfg
        self.table = JumpTable(triplet, cfg.eps_jump)
        self.drift = triplet.drift - self.table.compensator
        self.sd = math.sqrt(self.table.small_variance * cfg.step) if cfg.gaussian_compensation else 0.0

    def increments(self, rng: np.random.Generator, n: int) -> np.ndarray:
        dt = self.cfg.step
        out = np.full(n, self.drift * dt)
        if self.sd > 0:
            out += self.sd * rng.standard_normal(n)
        if self.table.rate > 0:
            counts = rng.poisson(self.table.rate * dt, size=n)
            total = int(counts.sum())
            if total:
                jumps = self.table.sample(rng.random(total))
                out += np.bincount(np.repeat(np.arange(n), counts), weights=jumps, minlength=n)
        return out

    def meta(self) -> Dict[str, float]:
        return {
            "eps_jump": self.cfg.eps_jump,
            "step": self.cfg.step,
            "jump_rate": self.table.rate,
            "small_jump_variance": self.table.small_variance,
            "neglected_tail_mass": self.table.tail_cut_mass,
            "mean_large_jump": self.table.mean_jump,
            "gaussian_compensation": self.cfg.gaussian_compensation,
        }


def simulate_levy(triplet: LevyTriplet, cfg: SimConfig) -> PathSample:
    """
    Path skeletons on the grid 0, step, ..., horizon

    Jumps below -eps_jump form a compound Poisson process drawn from the
    tabulated inverse CDF; smaller jumps become their compensator drift plus,
    with gaussian_compensation, a Gaussian of the truncated second moment.

    Raises:
        ConfigError: diffusion part present or grid too large to hold in memory
    """
    n_steps = cfg.n_steps
    if cfg.n_paths * (n_steps + 1) > 5e7:
        raise ConfigError(
            f"{cfg.n_paths} paths x {n_steps} steps too large for a stored skeleton"
        )
    stepper = LevyStepper(triplet, cfg)
    values = np.zeros((cfg.n_paths, n_steps + 1))
    for b, start, stop in _blocks(cfg.n_paths):
        rng = block_rng(cfg.seed, b)
        n = stop - start
        for j in range(n_steps):
            values[start:stop, j + 1] = values[start:stop, j] + stepper.increments(rng, n)
    times = np.linspace(0.0, n_steps * cfg.step, n_steps + 1)
    meta = stepper.meta()
    meta["n_paths"] = cfg.n_paths
    logger.info(f"simulated {cfg.n_paths} paths, {n_steps} steps, jump rate {stepper.table.rate:.3g}")
    return PathSample(times=times, values=values, seed=cfg.seed, meta=meta)


def _triplet_for(params: FamilyParams) -> LevyTriplet:
    if params.family is Family.GAMMA:
        return levy.triplet_gamma(params)
    return levy.triplet_delta(params)


def sample_exponential_functional(
    params: FamilyParams, direction: Direction, cfg: SimConfig
) -> SampleSet:
    """
    Draws of int_0^inf exp(-+ kappa xi_s) ds by trapezoidal integration

    A path stops once twice its tail bound exp(s kappa xi_t) / (kappa |mu_t|),
    with mu_t = s xi_t / t the realised drift, is below 1e-6 of the accumulated
    integral (s = -1 for MINUS_KAPPA, +1 for PLUS_KAPPA).

    Raises:
        DomainError: the drift regime makes the functional infinite
        HorizonError: some path has not stopped by cfg.horizon
    """
    triplet = _triplet_for(params)
    sign = -1.0 if direction is Direction.MINUS_KAPPA else 1.0
    if sign * triplet.mean >= 0:
        raise DomainError(
            f"{params.label()}: mean {triplet.mean:.4g} gives an infinite functional for {direction.value}"
        )
    kappa = params.kappa
    stepper = LevyStepper(triplet, cfg)
    dt = cfg.step
    out = np.empty(cfg.n_paths)
    worst_ratio, max_time = 0.0, 0.0

    for b, start, stop in _blocks(cfg.n_paths):
        rng = block_rng(cfg.seed, b)
        n = stop - start
        xi = np.zeros(n)
        integral = np.zeros(n)
        integrand = np.ones(n)
        active = np.ones(n, dtype=bool)
        final_ratio = np.zeros(n)
        t = 0.0
        while active.any():
            if t >= cfg.horizon:
                raise HorizonError(
                    f"{int(active.sum())} paths of block {b} still running at t={cfg.horizon}"
                )
            xi = xi + stepper.increments(rng, n)
            t += dt
            nxt = np.exp(sign * kappa * xi)
            integral = np.where(active, integral + 0.5 * dt * (integrand + nxt), integral)
            integrand = nxt
            if t < MIN_STOP_TIME:
                continue
            drift = sign * xi / t
            with np.errstate(divide="ignore", invalid="ignore"):
                bound = np.where(drift < 0, 2.0 * nxt / (kappa * np.abs(drift)), np.inf)
            ratio = bound / integral
            done = active & (ratio < TAIL_REL_TOL)
            final_ratio[done] = ratio[done]
            active &= ~done
        out[start:stop] = integral
        worst_ratio = max(worst_ratio, float(final_ratio.max()))
        max_time = max(max_time, t)

    meta = stepper.meta()
    meta.update(
        {
            "n_paths": cfg.n_paths,
            "direction": direction.value,
            "max_tail_ratio": worst_ratio,
            "max_stop_time": max_time,
        }
    )
    logger.info(
        f"{params.label()}: {cfg.n_paths} functionals, stop by t={max_time:.1f}, "
        f"tail ratio <= {worst_ratio:.1e}"
    )
    return SampleSet(values=out.tolist(), seed=cfg.seed, meta=meta)


def sample_absorption_time(p: CbiParams, x: float, cfg: SimConfig) -> SampleSet:
    """
    Exact absorption times of the pure branching process from x:
    g(T_0) ~ Exp(x) with g(t) = (c t)^(-1/kappa), so T_0 = E^(-kappa) / c
    """
    if p.delta != 0:
        raise DomainError("absorption times need delta = 0")
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    out = np.empty(cfg.n_paths)
    for b, start, stop in _blocks(cfg.n_paths):
        e = block_rng(cfg.seed, b).exponential(scale=1.0 / x, size=stop - start)
        out[start:stop] = e ** (-p.kappa) / p.c
    return SampleSet(
        values=out.tolist(),
        seed=cfg.seed,
        meta={"n_paths": cfg.n_paths, "sampler": "exact", "x": x},
    )


def laplace_invert(
    F: Callable[[complex], complex],
    y_grid: Sequence[float],
    n_nodes: int = 24,
    abscissa_scale: float = 0.4,
    tol: float = 1e-6,
) -> List[float]:
    """
    Fixed Talbot inversion of a Laplace transform F on y_grid

    The contour is p(theta) = (r/y) theta (cot theta + i), r = abscissa_scale * n_nodes.
    The result is accepted when doubling n_nodes moves it by less than tol
    (relative to max(1, |value|)).

    Raises:
        ConvergenceError: the doubling check fails
        DomainError: n_nodes < 20 or a non-positive grid point
    """
    if n_nodes < 20:
        raise DomainError(f"n_nodes={n_nodes} below 20")
    grid = np.asarray(y_grid, dtype=float)
    if np.any(grid <= 0):
        raise DomainError("inversion grid must be positive")
    coarse = _talbot(F, grid, n_nodes, abscissa_scale)
    fine = _talbot(F, grid, 2 * n_nodes, abscissa_scale)
    change = np.abs(fine - coarse) / np.maximum(1.0, np.abs(fine))
    if np.any(change > tol):
        worst = int(np.argmax(change))
        raise ConvergenceError(
            f"Talbot inversion at y={grid[worst]:.4g}: doubling nodes moved the value by {change[worst]:.1e}"
        )
    return fine.tolist()


def _talbot(F, grid: np.ndarray, M: int, scale: float) -> np.ndarray:
    r = scale * M
    theta = np.arange(1, M) * np.pi / M
    cot = 1.0 / np.tan(theta)
    shape = theta * (cot + 1j)
    weight = 1.0 + 1j * theta * (1.0 + cot * cot) - 1j * cot
    out = np.empty(grid.size)
    for i, y in enumerate(grid):
        p0 = r / y
        nodes = p0 * shape
        values = np.array([complex(F(p)) for p in nodes])
        total = 0.5 * math.exp(r) * complex(F(p0)).real + np.sum(np.exp(y * nodes) * weight * values).real
        out[i] = r / (M * y) * total
    return out


def ks_statistic(samples: SampleSet, cdf: Callable[[float], float]) -> Tuple[float, float]:
    """
    Two-sided Kolmogorov-Smirnov distance and the asymptotic 1% critical value 1.63/sqrt(n)

    Ties are kept with multiplicity.
    """
    values = np.sort(samples.array())
    n = values.size
    if n < 100:
        raise DomainError(f"KS statistic needs at least 100 samples, got {n}")
    probs = np.array([cdf(v) for v in values])
    upper = np.arange(1, n + 1) / n - probs
    lower = probs - np.arange(0, n) / n
    stat = float(max(upper.max(), lower.max()))
    return stat, 1.63 / math.sqrt(n)


def positive_stable(kappa: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Positive kappa-stable draws with E exp(-l S) = exp(-l^kappa) (Kanter's representation):
    S = (sin(kappa U) / sin U)^(1/kappa) (sin((1 - kappa) U) / E)^((1 - kappa)/kappa)
    """
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa={kappa} outside (0, 1]")
    if kappa == 1:
        return np.ones(size)
    u = rng.uniform(0.0, math.pi, size)
    e = rng.exponential(size=size)
    return (np.sin(kappa * u) / np.sin(u)) ** (1.0 / kappa) * (
        np.sin((1.0 - kappa) * u) / e
    ) ** ((1.0 - kappa) / kappa)


def sample_entrance_law(p: CbiParams, t: float, cfg: SimConfig, n_grid: int = 400) -> SampleSet:
    """Inverse-transform draws from entrance_density at time t, tabulated on a log grid"""
    if not (t > 0 and p.delta > 0):
        raise DomainError("entrance law needs t > 0 and delta > 0")
    scale = (p.c * t) ** (1.0 / p.kappa)
    grid = scale * np.logspace(-6, 3, n_grid)
    pieces = np.empty(n_grid)
    previous = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for i, y in enumerate(grid):
            pieces[i], _ = integrate.quad(lambda v: entrance_density(p, t, v), previous, y, limit=100)
            previous = y
    cdf = np.cumsum(pieces)
    mass = cdf[-1]
    probs, keep = np.unique(cdf / mass, return_index=True)
    inverse = interpolate.interp1d(
        probs, grid[keep], bounds_error=False, fill_value=(0.0, grid[-1]), assume_sorted=True
    )
    out = np.empty(cfg.n_paths)
    for b, start, stop in _blocks(cfg.n_paths):
        out[start:stop] = inverse(block_rng(cfg.seed, b).random(stop - start))
    return SampleSet(
        values=out.tolist(),
        seed=cfg.seed,
        meta={"n_paths": cfg.n_paths, "sampler": "inverse_cdf", "tabulated_mass": float(mass)},
    )


def esscher_reweighted_mean(
    params: FamilyParams,
    g: float,
    t: float,
    cfg: SimConfig,
    functional: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> Tuple[float, float, float]:
    """
    E^(gamma)[h(xi_t)] from P^(0) paths weighted by exp(gamma xi_t - psi^(0)(gamma) t)

    Returns:
        (weighted mean, its standard error, mean weight)
    """
    base = FamilyParams(alpha=params.alpha, gamma=0.0)
    stepper = LevyStepper(levy.triplet_gamma(base), cfg)
    n_steps = int(round(t / cfg.step))
    ends = np.empty(cfg.n_paths)
    for b, start, stop in _blocks(cfg.n_paths):
        rng = block_rng(cfg.seed, b)
        xi = np.zeros(stop - start)
        for _ in range(n_steps):
            xi += stepper.increments(rng, stop - start)
        ends[start:stop] = xi
    h = functional(ends) if functional is not None else ends
    weights = levy.esscher_weight(base, g, n_steps * cfg.step, ends)
    weighted = weights * h
    se = float(weighted.std(ddof=1) / math.sqrt(cfg.n_paths))
    return float(weighted.mean()), se, float(weights.mean())
