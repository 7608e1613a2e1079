"""
Acceptance suite behind `wrightlevy verify`

Every closed form is checked against an independent route: quadrature,
a second series, Laplace inversion or Monte Carlo. A check returns a
CheckResult; run_checks raises OracleMismatchError after running all
requested checks if any failed.
"""
import math
import warnings
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from wrightlevy.app.core.config import settings
from wrightlevy.app.core.exceptions import OracleMismatchError
from wrightlevy.app.core.logging import get_logger, run_context
from wrightlevy.app.schemas.check import CheckResult
from wrightlevy.app.schemas.params import CbiParams, FamilyParams
from wrightlevy.app.schemas.sim import Direction, SimConfig
from wrightlevy.app.schemas.wright import WrightSpec
from wrightlevy.app.services import cbi, expfun, levy, sim
from wrightlevy.app.services.wright import (
    wright_algebraic_asymptotic_1psi1,
    wright_eval,
    wright_exponential_asymptotic,
    wright_series,
)

logger = get_logger("wrightlevy.app.services.verification")

LAMBDAS = (0.5, 1.0, 2.0)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _worst(cases: Iterable[Tuple[float, str]]) -> Tuple[float, str]:
    return max(cases, key=lambda c: c[0])


def _result(name: str, cases: Iterable[Tuple[float, str]], tolerance: float) -> CheckResult:
    worst, where = _worst(cases)
    return CheckResult(name=name, passed=worst <= tolerance, worst=worst, tolerance=tolerance, detail=where)


def check_integral_identity(seed: int) -> CheckResult:
    cases = []
    for alpha in (1.2, 1.5, 1.9):
        for g in (-0.5, 0.0, 1.0):
            for lam in (0.5, 1.0, 2.5):
                lhs, rhs = levy.verify_integral_identity(alpha, g, lam)
                cases.append((_rel(lhs, rhs), f"alpha={alpha}, gamma={g}, lambda={lam}"))
    return _result("integral_identity", cases, 1e-8)


def check_triplets(seed: int) -> CheckResult:
    cases = []
    gp = FamilyParams(alpha=1.5, gamma=0.0)
    dp = FamilyParams(alpha=1.5, delta=1.0)
    tg, td = levy.triplet_gamma(gp), levy.triplet_delta(dp)
    for lam in LAMBDAS:
        cases.append((_rel(levy.exponent_from_triplet(tg, lam), levy.psi_gamma(gp, lam)), f"gamma, lambda={lam}"))
        cases.append((_rel(levy.exponent_from_triplet(td, lam), levy.psi_delta(dp, lam)), f"delta, lambda={lam}"))
    return _result("triplet_reconstruction", cases, 1e-6)


def check_brownian_limit(seed: int) -> CheckResult:
    alpha = 2.0 - 1e-6
    cases = []
    for g in (-1.0, 0.0, 1.0):
        p = FamilyParams(alpha=alpha, gamma=g)
        for lam in LAMBDAS:
            cases.append(
                (_rel(levy.psi_gamma(p, lam), levy.brownian_limit_exponent(g, lam)), f"gamma={g}, lambda={lam}")
            )
    return _result("brownian_limit", cases, 1e-4)


def check_stable_limit(seed: int) -> CheckResult:
    p = FamilyParams(alpha=1.5, gamma=0.0)
    cases = []
    for lam in LAMBDAS:
        scaled, target = levy.stable_limit_exponent(p, lam, 1e-8)
        cases.append((_rel(scaled, target), f"lambda={lam}"))
    return _result("stable_limit", cases, 1e-3)


def check_kappa_one_wright(seed: int) -> CheckResult:
    cases = []
    for delta in (0.75, 1.0, 1.5):
        spec = WrightSpec(upper=((1.0, 1.0 + 2 * delta),), lower=((1.0, 2 * delta),))
        for x in np.linspace(0.0, 20.0, 41):
            value = wright_eval(spec, -float(x), 1e-12).value
            exact = math.exp(-x) * (2 * delta - x)
            cases.append((abs(value - exact), f"delta={delta}, x={x:g}"))
    return _result("kappa_one_wright", cases, 1e-10)


def check_dufresne(seed: int) -> CheckResult:
    law = expfun.ExpFunctionalLaw(FamilyParams(alpha=2.0 - 1e-8, delta=1.0), check_mass=False)
    cases = []
    for y in np.geomspace(0.1, 20.0, 30):
        cases.append((_rel(expfun.density(law, float(y)), expfun.dufresne_density(1.0, float(y))), f"y={y:.4g}"))
    return _result("dufresne_density", cases, 1e-4)


def check_duality(seed: int) -> CheckResult:
    cases = []
    inside = FamilyParams(alpha=1.5, delta=0.5)
    law_in = expfun.ExpFunctionalLaw(inside, check_mass=False)
    outside = FamilyParams(alpha=1.5, delta=0.8)
    law_out = expfun.ExpFunctionalLaw(outside, check_mass=False)
    for x in (0.5, 1.0, 2.0):
        cases.append(
            (_rel(expfun.laplace_of_density(law_in, x), expfun.laplace_N(inside, x)), f"N, delta=0.5, x={x}")
        )
        cases.append(
            (
                _rel(expfun.laplace_of_density(law_out, x), expfun.mixture_integral(outside, x)),
                f"mixture, delta=0.8, x={x}",
            )
        )
    return _result("laplace_duality", cases, 1e-6)


def check_constant_C(seed: int) -> CheckResult:
    cases = []
    for delta in (0.4, 0.5, 0.6):
        p = FamilyParams(alpha=1.5, delta=delta)
        product, _ = expfun.constant_C_product(p)
        cases.append((_rel(product, expfun.constant_C(p)), f"delta={delta}"))
    return _result("constant_C", cases, 1e-3)


def _complex_semigroup(p: CbiParams, t: float, x: float) -> Callable[[complex], complex]:
    s = p.c * t

    def F(lam: complex) -> complex:
        base = 1.0 + s * lam**p.kappa
        return base ** (-p.D) * np.exp(-x * lam * base ** (-1.0 / p.kappa))

    return F


CBI_PARAMS = dict(kappa=0.5, delta=0.8)


def check_cbi_laplace(seed: int) -> CheckResult:
    p = CbiParams(**CBI_PARAMS)
    t, x = 1.0, 0.5
    scale = (p.c * t) ** (1.0 / p.kappa)
    cases = []
    for lam in LAMBDAS:
        numeric = cbi.laplace_of_density(lambda y: cbi.transition_density(p, t, x, y), lam, scale)
        cases.append((_rel(numeric, cbi.laplace_semigroup(p, t, lam, x)), f"lambda={lam}"))
    return _result("cbi_laplace", cases, 1e-5)


def check_chapman_kolmogorov(seed: int) -> CheckResult:
    p = CbiParams(**CBI_PARAMS)
    s, t, x = 0.5, 0.5, 0.5
    cases = []
    for y in (0.5, 1.0, 2.0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            pieces = [0.0, 0.5, 2.0, 10.0, 60.0]
            total = 0.0
            for lo, hi in zip(pieces[:-1], pieces[1:]):
                v, _ = integrate.quad(
                    lambda z: cbi.transition_density(p, s, x, z) * cbi.transition_density(p, t, z, y),
                    lo,
                    hi,
                    epsrel=1e-8,
                    limit=100,
                )
                total += v
        cases.append((_rel(total, cbi.transition_density(p, s + t, x, y)), f"y={y}"))
    return _result("chapman_kolmogorov", cases, 1e-4)


def check_entrance_mass(seed: int) -> CheckResult:
    p = CbiParams(**CBI_PARAMS)
    mass = cbi.total_mass(lambda y: cbi.entrance_density(p, 1.0, y), p.kappa, p.c ** (1.0 / p.kappa))
    return _result("entrance_mass", [(abs(mass - 1.0), "t=1")], 1e-6)


def check_laplace_inversion(seed: int) -> CheckResult:
    p = CbiParams(**CBI_PARAMS)
    t, x = 1.0, 0.5
    grid = [0.5, 1.0, 2.0, 4.0]
    cases = []
    entrance = sim.laplace_invert(_complex_semigroup(p, t, 0.0), grid)
    transition = sim.laplace_invert(_complex_semigroup(p, t, x), grid)
    for y, e, q in zip(grid, entrance, transition):
        cases.append((_rel(e, cbi.entrance_density(p, t, y)), f"entrance, y={y}"))
        cases.append((_rel(q, cbi.transition_density(p, t, x, y)), f"transition, y={y}"))
    return _result("laplace_inversion", cases, 1e-4)


def check_bessel(seed: int) -> CheckResult:
    p = CbiParams(kappa=1.0, delta=1.0)
    cases = []
    for t in (0.5, 1.0, 2.0):
        for x in (0.5, 1.0, 2.0):
            for y in (0.5, 1.0, 2.0):
                series = cbi.transition_density(p, t, x, y, tol=1e-13)
                cases.append((_rel(series, cbi.bessel_transition_density(p, t, x, y)), f"t={t}, x={x}, y={y}"))
    return _result("squared_bessel", cases, 1e-8)


def check_ihat_series(seed: int) -> CheckResult:
    kappa = 1.0 / math.sqrt(2.0)
    cases = []
    for x in (0.02, 0.05, 0.1):
        cases.append((_rel(cbi.ihat_series(kappa, x), cbi.ihat(kappa, x)), f"kappa={kappa:.4f}, x={x}"))
    return _result("ihat_series", cases, 1e-8)


def check_absorption(seed: int) -> CheckResult:
    p = CbiParams(kappa=0.5)
    x = 1.0
    samples = sim.sample_absorption_time(p, x, SimConfig(seed=seed, n_paths=10_000)).array()
    cases = []
    for q in (0.5, 1.0):
        weights = np.exp(-q * samples)
        se = weights.std(ddof=1) / math.sqrt(weights.size)
        # in units of three standard errors
        cases.append((abs(weights.mean() - cbi.absorption_laplace(p, q, x)) / (3.0 * se), f"q={q}"))
    return _result("absorption_laplace", cases, 1.0)


def _mc_config(seed: int) -> SimConfig:
    return SimConfig(seed=seed, n_paths=10_000)


def check_mc_minus_kappa(seed: int) -> CheckResult:
    p = FamilyParams(alpha=1.5, gamma=0.0)
    samples = sim.sample_exponential_functional(p, Direction.MINUS_KAPPA, _mc_config(seed))
    stat, critical = sim.ks_statistic(samples, lambda v: expfun.minus_functional_cdf(p.kappa, v))
    return CheckResult(name="mc_minus_kappa", passed=stat < critical, worst=stat, tolerance=critical)


def _tabulated_cdf(law: expfun.ExpFunctionalLaw, samples) -> Callable[[float], float]:
    values = samples.array()
    grid = np.geomspace(max(values.min(), 1e-6) / 2, values.max() * 2, 800)
    table = expfun.density_cdf_table(law, grid)
    return lambda v: float(np.interp(v, grid, table))


def check_mc_density(seed: int) -> CheckResult:
    p = FamilyParams(alpha=1.5, delta=0.8)
    law = expfun.ExpFunctionalLaw(p)
    samples = sim.sample_exponential_functional(p, Direction.PLUS_KAPPA, _mc_config(seed))
    stat, critical = sim.ks_statistic(samples, _tabulated_cdf(law, samples))
    return CheckResult(name="mc_plus_kappa", passed=stat < critical, worst=stat, tolerance=critical)


def check_mc_dufresne(seed: int) -> CheckResult:
    p = FamilyParams(alpha=2.0 - 1e-8, delta=1.0)
    samples = sim.sample_exponential_functional(p, Direction.PLUS_KAPPA, _mc_config(seed))
    # 2/G(1) with G standard exponential
    stat, critical = sim.ks_statistic(samples, lambda v: math.exp(-2.0 / v) if v > 0 else 0.0)
    return CheckResult(name="mc_dufresne", passed=stat < critical, worst=stat, tolerance=critical)


def check_unimodality(seed: int) -> CheckResult:
    cases = []
    for alpha, delta in ((1.5, 0.5), (1.5, 0.8), (1.2, 0.3), (1.8, 0.6), (1.9, 1.2)):
        p = FamilyParams(alpha=alpha, delta=delta)
        root = expfun.mode(p)
        cases.append((abs(expfun.mode_function(p, root, 1e-12)), f"alpha={alpha}, delta={delta}"))
    for delta in (0.75, 1.0, 1.5):
        ad = 2.0 * delta
        spec = WrightSpec(upper=((1.0, 1.0 + ad),), lower=((1.0, ad),))
        root = optimize.brentq(lambda x: wright_eval(spec, -x, 1e-14).value, 0.5 * ad, 2.0 * ad, xtol=1e-13)
        cases.append((abs(root - ad), f"kappa=1, alpha delta={ad}"))
    # log f is convex only past the mode; checked on the power-law tail
    law = expfun.ExpFunctionalLaw(FamilyParams(alpha=1.5, delta=0.8), check_mass=False)
    for y in (1e2, 1e3, 1e4):
        cases.append((max(0.0, -log_second_difference(law, y, 0.1 * y)), f"log-convex tail at y={y:g}"))
    return _result("unimodality", cases, 1e-8)


def log_second_difference(law: expfun.ExpFunctionalLaw, y: float, h: float) -> float:
    """log f(y + h) - 2 log f(y) + log f(y - h)"""
    return (
        math.log(expfun.density(law, y + h))
        - 2.0 * math.log(expfun.density(law, y))
        + math.log(expfun.density(law, y - h))
    )


def overlap_ratio(spec: WrightSpec, z: float) -> float:
    """wright_series / wright_exponential_asymptotic at z > 0"""
    series = wright_series(spec, z, 1e-12)
    asym = wright_exponential_asymptotic(spec, z)
    return math.exp(math.log(series.value) - math.log(asym.value) - asym.log_scale)


def check_asymptotics(seed: int) -> CheckResult:
    cases = []
    law = expfun.ExpFunctionalLaw(FamilyParams(alpha=1.5, delta=0.8), check_mass=False)
    y = 1e3
    ratio = expfun.density(law, y) * y**law.a / expfun.tail_constant(law)
    cases.append((abs(ratio - 1.0) / 0.01, "density tail at y=1e3"))

    window = FamilyParams(alpha=1.5, delta=0.5)
    x = 100.0 * window.c * window.kappa
    ratio = expfun.laplace_N(window, x) / expfun.laplace_N_tail(window, x)
    cases.append((abs(ratio - 1.0) / 0.01, "N tail at z=100"))

    spec = WrightSpec(upper=((1.0, 1.2),), lower=((0.5, 0.6),))
    series = wright_series(spec, -30.0, 1e-12)
    asym = wright_algebraic_asymptotic_1psi1(1.2, 1.0, 0.6, 0.5, 30.0)
    bound = series.abs_err + asym.abs_err
    cases.append((abs(series.value - asym.value) / max(bound, 1e-300), "series vs algebraic at y=30"))

    first, _ = expfun.laplace_N_specs(window)
    _, second = expfun.laplace_N_specs(FamilyParams(alpha=1.5, delta=0.8))
    for label, spec, points in (("1Psi2", first, (20.0, 40.0)), ("0Psi1", second, (10.0, 20.0, 40.0))):
        for z in points:
            cases.append((abs(overlap_ratio(spec, z) - 1.0) / 0.02, f"{label} series vs exponential at z={z:g}"))
    # each case is scaled so that 1 is the allowed bound
    return _result("asymptotics", cases, 1.0)


CHECKS: Dict[str, Callable[[int], CheckResult]] = {
    "integral_identity": check_integral_identity,
    "triplet_reconstruction": check_triplets,
    "brownian_limit": check_brownian_limit,
    "stable_limit": check_stable_limit,
    "kappa_one_wright": check_kappa_one_wright,
    "dufresne_density": check_dufresne,
    "laplace_duality": check_duality,
    "constant_C": check_constant_C,
    "cbi_laplace": check_cbi_laplace,
    "chapman_kolmogorov": check_chapman_kolmogorov,
    "entrance_mass": check_entrance_mass,
    "laplace_inversion": check_laplace_inversion,
    "squared_bessel": check_bessel,
    "ihat_series": check_ihat_series,
    "absorption_laplace": check_absorption,
    "unimodality": check_unimodality,
    "asymptotics": check_asymptotics,
    "mc_minus_kappa": check_mc_minus_kappa,
    "mc_plus_kappa": check_mc_density,
    "mc_dufresne": check_mc_dufresne,
}

GROUPS: Dict[str, List[str]] = {
    "all": list(CHECKS),
    "identity": ["integral_identity"],
}


def run_checks(names: Iterable[str], seed: Optional[int] = None) -> List[CheckResult]:
    """
    Run the named checks in order and log each outcome

    Raises:
        OracleMismatchError: one or more checks failed (all are run first)
    """
    seed = settings.WRIGHTLEVY_SEED if seed is None else seed
    results = []
    for name in names:
        with run_context(f"verify {name}", seed):
            result = CHECKS[name](seed)
            log = logger.info if result.passed else logger.error
            log(result.line())
        results.append(result)
    failed = [r for r in results if not r.passed]
    if failed:
        raise OracleMismatchError(
            f"{len(failed)} of {len(results)} checks failed: " + ", ".join(r.name for r in failed),
            results=results,
        )
    return results
