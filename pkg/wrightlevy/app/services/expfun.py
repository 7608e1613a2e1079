"""
Laws of the exponential functionals

Sigma = int_0^inf e^(kappa xi_s) ds under the delta family (negative mean),
its density, Mellin moments, Laplace transform N and their representations,
and the law of int_0^inf e^(-kappa xi_s) ds under P^(0).

Throughout k = c kappa and a = alpha delta / kappa.
"""
import math
import warnings
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special

from wrightlevy.app.core.config import settings
from wrightlevy.app.core.exceptions import (
    BracketError,
    DomainError,
    PrecisionError,
    QuadratureError,
    SeriesPoleError,
)
from wrightlevy.app.core.logging import get_logger
from wrightlevy.app.schemas.params import Family, FamilyParams, stable_constant
from wrightlevy.app.schemas.wright import EvalResult, Method, WrightSpec
from wrightlevy.app.services.levy import log_psi_delta
from wrightlevy.app.services.specfun import EULER_GAMMA, gamma
from wrightlevy.app.services.wright import wright_eval

logger = get_logger("wrightlevy.app.services.expfun")


class ExpFunctionalLaw:
    """
    Law of Sigma under P^(0,delta), delta > kappa/alpha

    The constructor checks that the density integrates to one; the check
    result is stored and never recomputed.
    """

    def __init__(self, params: FamilyParams, check_mass: bool = True, tol: Optional[float] = None):
        if params.family is not Family.DELTA:
            raise DomainError("exponential functional law needs delta-family parameters")
        if not params.negative_mean:
            raise DomainError(
                f"{params.label()}: delta <= kappa/alpha, the functional is infinite"
            )
        self.params = params
        self.tol = tol if tol is not None else 1e-10
        self.kappa = params.kappa
        self.k = params.c * params.kappa
        self.a = params.a
        self.normalization = abs(params.M_delta)
        self.spec = WrightSpec(upper=((1.0, self.a),), lower=((self.kappa, params.alpha * params.delta),))
        self.mass: Optional[float] = None
        if check_mass:
            self.mass = total_mass(self)
            if abs(self.mass - 1.0) > 1e-6:
                raise QuadratureError(f"{params.label()}: density mass {self.mass} != 1")

    @property
    def prefactor(self) -> float:
        """|M_delta| / Gamma(a)"""
        return self.normalization / math.gamma(self.a)

    def __repr__(self) -> str:
        return f"ExpFunctionalLaw({self.params.label()})"


def _law(params_or_law) -> ExpFunctionalLaw:
    if isinstance(params_or_law, ExpFunctionalLaw):
        return params_or_law
    return ExpFunctionalLaw(params_or_law, check_mass=False)


def density_eval(law: ExpFunctionalLaw, y: float, tol: Optional[float] = None) -> EvalResult:
    """
    Density with the Wright evaluation's error scaled by the prefactor

    Falls back to the exponential-mixture quadrature when no Wright method
    reaches the tolerance.
    """
    if not y > 0:
        raise DomainError(f"density needs y > 0, got {y}")
    ky = law.k * y
    scale = law.prefactor * ky ** (-law.a)
    try:
        inner = wright_eval(law.spec, -1.0 / ky, tol if tol is not None else law.tol)
    except (PrecisionError, SeriesPoleError) as exc:
        logger.debug(f"{law!r}: Wright evaluation failed at y={y} ({exc}), using the mixture")
        return mixture_density_eval(law, y)
    return inner.model_copy(
        update={"value": scale * inner.value, "abs_err": scale * inner.abs_err}
    )


def density(law: ExpFunctionalLaw, y: float, tol: Optional[float] = None) -> float:
    """
    Density of Sigma

        f(y) = (|M_delta| / Gamma(a)) (k y)^(-a) 1Psi1((1, a); (kappa, alpha delta) | -1/(k y))

    f vanishes linearly at 0 and f(y) y^a -> |M_delta| k^(-a) / Gamma(alpha delta)
    as y -> inf. Values within the evaluation error of zero are clipped at 0.

    Raises:
        QuadratureError: the mixture fallback could not be set up
    """
    result = density_eval(law, y, tol)
    if result.value < 0:
        if result.value < -max(result.abs_err, 1e-300) * 10:
            logger.warning(f"{law!r}: negative density {result.value:.3e} at y={y}")
        return 0.0
    return result.value


def tail_constant(law: ExpFunctionalLaw) -> float:
    """lim f(y) y^a = |M_delta| k^(-a) / Gamma(alpha delta)"""
    p = law.params
    return law.normalization * law.k ** (-law.a) / math.gamma(p.alpha * p.delta)


def total_mass(law: ExpFunctionalLaw) -> float:
    """int_0^inf f by quadrature, split at the bulk of the law"""
    y_mid = 1.0 / law.k
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, _ = integrate.quad(lambda y: density(law, y), 0.0, y_mid, epsabs=1e-12, limit=200)
        body, _ = integrate.quad(
            lambda y: density(law, y), y_mid, 100.0 * y_mid, epsabs=1e-12, limit=200
        )
    tail = _tail_integral(law, 100.0 * y_mid)
    return head + body + tail


def _tail_integral(law: ExpFunctionalLaw, y0: float) -> float:
    """int_y0^inf f, with t = 1/y: int_0^(1/y0) t^(a-2) [f(1/t) t^(-a)] dt"""
    c_tail = tail_constant(law)

    def regular(t: float) -> float:
        if t <= 0:
            return c_tail
        return density(law, 1.0 / t) * t ** (-law.a)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(
            regular,
            0.0,
            1.0 / y0,
            weight="alg",
            wvar=(law.a - 2.0, 0.0),
            epsabs=1e-13,
            limit=200,
        )
    return value


def moments(params: FamilyParams, s: float) -> float:
    """
    Mellin transform E[Sigma^(s - 1)] for 0 < s < a

        Gamma(kappa) Gamma(s) Gamma(a - s) / (Gamma(a - 1) Gamma(kappa s)) k^(1 - s)

    Raises:
        DomainError: s outside (0, a)
    """
    law = _law(params)
    a, kappa = law.a, law.kappa
    if not 0 < s < a:
        raise DomainError(f"moment of order s-1={s - 1} needs 0 < s < a={a}")
    log_value = (
        special.gammaln(kappa)
        + special.gammaln(s)
        + special.gammaln(a - s)
        - special.gammaln(a - 1.0)
        - special.gammaln(kappa * s)
        + (1.0 - s) * math.log(law.k)
    )
    return float(math.exp(log_value))


def _phi_negative(law: ExpFunctionalLaw, u: float) -> float:
    """0Psi1((kappa, alpha delta) | -u)"""
    spec = WrightSpec(lower=((law.kappa, law.params.alpha * law.params.delta),))
    return wright_eval(spec, -u, 1e-10).value


def _mixture_cutoff(law: ExpFunctionalLaw, extra_rate: float = 0.0) -> float:
    """u beyond which the mixing kernel is below 1e-17 of its size at 1"""
    spec = WrightSpec(lower=((law.kappa, law.params.alpha * law.params.delta),))
    S, T = spec.S, spec.T
    decay = -S * math.cos(math.pi / S)
    candidates = []
    if decay > 1e-3:
        candidates.append((40.0 / decay) ** S / T)
    if extra_rate > 0:
        candidates.append(40.0 / extra_rate)
    if not candidates:
        raise QuadratureError("mixing kernel does not decay fast enough for quadrature")
    return max(min(candidates), 10.0)


def mixture_density(params: FamilyParams, y: float) -> float:
    """
    Density as a mixture of exponentials over the 0Psi1 kernel:
    f(y) = (|M_delta| / Gamma(a)) int_0^inf e^(-u k y) u^(a-1) 0Psi1((kappa, alpha delta) | -u) du
    """
    return mixture_density_eval(params, y).value


def mixture_density_eval(params: FamilyParams, y: float) -> EvalResult:
    law = _law(params)
    if not y > 0:
        raise DomainError(f"mixture density needs y > 0, got {y}")
    rate = law.k * y
    upper = _mixture_cutoff(law, rate)
    nodes = [1.0, *[b for b in (10.0, 100.0) if b < upper], upper]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # u^(a-1) is not smooth at 0
        head, head_err = integrate.quad(
            lambda u: math.exp(-rate * u) * _phi_negative(law, u),
            0.0,
            nodes[0],
            weight="alg",
            wvar=(law.a - 1.0, 0.0),
            epsabs=1e-13,
            epsrel=1e-10,
            limit=400,
        )
        rest, rest_err = _piecewise(
            lambda u: math.exp(-rate * u) * u ** (law.a - 1.0) * _phi_negative(law, u),
            nodes,
        )
    return EvalResult(
        value=law.prefactor * (head + rest),
        abs_err=law.prefactor * (head_err + rest_err),
        method=Method.QUADRATURE,
        terms=len(nodes),
    )


def _piecewise(func, nodes) -> Tuple[float, float]:
    total, err = 0.0, 0.0
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        v, e = integrate.quad(func, lo, hi, epsabs=1e-13, epsrel=1e-10, limit=400)
        total += v
        err += e
    return total, err


def dufresne_density(delta: float, y: float) -> float:
    """
    kappa = 1 (alpha = 2) law 2 / G(2 delta - 1):
    2^(2 delta - 1) y^(-2 delta) e^(-2/y) / Gamma(2 delta - 1)
    """
    if not delta > 0.5:
        raise DomainError(f"Dufresne law needs delta > 1/2, got {delta}")
    if y <= 0:
        return 0.0
    nu = 2.0 * delta - 1.0
    log_value = nu * math.log(2.0) - 2.0 * delta * math.log(y) - 2.0 / y - math.lgamma(nu)
    return math.exp(log_value)


def linnik_limit_density(kappa: float, y: float) -> float:
    """
    y^(-1) sum_n (-1/y)^n / Gamma(kappa (n + 1)) = y^(-1) 1Psi1((1, 1); (kappa, kappa) | -1/y)

    f^(delta)(y) / |M_delta| tends to linnik_limit_density(kappa, k y) as
    delta decreases to kappa/alpha.
    """
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa={kappa} outside (0, 1]")
    if not y > 0:
        raise DomainError(f"y must be positive, got {y}")
    spec = WrightSpec(upper=((1.0, 1.0),), lower=((kappa, kappa),))
    return wright_eval(spec, -1.0 / y, 1e-10).value / y


def _check_window(params: FamilyParams):
    if params.family is not Family.DELTA:
        raise DomainError("delta-family parameters required")
    if not 0 < params.m_kappa < 1:
        raise DomainError(
            f"{params.label()}: need kappa/alpha < delta < 2 kappa/alpha (m_kappa={params.m_kappa})"
        )


def constant_C(params: FamilyParams) -> float:
    """C = Gamma(m_kappa) Gamma(kappa) / Gamma(alpha delta)"""
    _check_window(params)
    return gamma(params.m_kappa) * gamma(params.kappa) / gamma(params.alpha * params.delta)


def constant_C_product(params: FamilyParams, n_factors: int = 100_000) -> Tuple[float, float]:
    """
    C from a convergent product over psi^(0,delta) with u = 1 - m_kappa:

        C = kappa^(-kappa u) e^(E kappa u) / Gamma(1 + u)
            / prod_k e^(kappa u / k) (k + u) psi(kappa k) / (k psi(kappa (k + u)))

    Each factor is 1 + O(1/k^2). The partial product error behaves like A/n,
    so one Richardson step against n/2 gives the estimate.

    Returns:
        (extrapolated value, relative tail estimate)

    Raises:
        DomainError: outside the m_kappa window or n_factors < 1000
        PrecisionError: tail estimate above 1e-4
    """
    _check_window(params)
    if n_factors < 1000:
        raise DomainError(f"n_factors={n_factors} below 1000")
    kappa = params.kappa
    u = 1.0 - params.m_kappa
    k = np.arange(1, n_factors + 1, dtype=float)
    log_factors = (
        kappa * u / k
        + np.log1p(u / k)
        + log_psi_delta(params, kappa * k)
        - log_psi_delta(params, kappa * (k + u))
    )
    partial = np.cumsum(log_factors)
    log_full, log_half = partial[-1], partial[n_factors // 2 - 1]
    log_extrapolated = 2.0 * log_full - log_half
    tail = abs(log_full - log_half)
    prefactor = -kappa * u * math.log(kappa) + EULER_GAMMA * kappa * u - math.lgamma(1.0 + u)
    value = math.exp(prefactor - log_extrapolated)
    logger.debug(f"constant_C_product({params.label()}): n={n_factors}, tail={tail:.2e}")
    if tail > 1e-4:
        raise PrecisionError(f"product tail estimate {tail:.2e} above 1e-4")
    return value, tail


def constant_C_partial_products(params: FamilyParams, n_factors: int) -> np.ndarray:
    """C estimates from each partial product, k = 1..n (for convergence checks)"""
    _check_window(params)
    kappa = params.kappa
    u = 1.0 - params.m_kappa
    k = np.arange(1, n_factors + 1, dtype=float)
    log_factors = (
        kappa * u / k
        + np.log1p(u / k)
        + log_psi_delta(params, kappa * k)
        - log_psi_delta(params, kappa * (k + u))
    )
    prefactor = -kappa * u * math.log(kappa) + EULER_GAMMA * kappa * u - math.lgamma(1.0 + u)
    return np.exp(prefactor - np.cumsum(log_factors))


def laplace_N_specs(params: FamilyParams) -> Tuple[WrightSpec, WrightSpec]:
    """The 1Psi2((1,1); (1,m)(kappa,kappa)) and 0Psi1((kappa, alpha delta)) behind N"""
    kappa = params.kappa
    first = WrightSpec(upper=((1.0, 1.0),), lower=((1.0, params.m_kappa), (kappa, kappa)))
    second = WrightSpec(lower=((kappa, params.alpha * params.delta),))
    return first, second


def laplace_N_pieces(params: FamilyParams, x: float, tol: Optional[float] = None) -> Tuple[EvalResult, EvalResult]:
    """
    The two terms of N(x) = I(x) - C x^(a-1) I_m(x), with z = x/(c kappa):

        I(x)  = Gamma(m) Gamma(kappa) 1Psi2((1,1); (1,m)(kappa,kappa) | z)
        second = Gamma(m) Gamma(kappa) z^(a-1) 0Psi1((kappa, alpha delta) | z)
    """
    _check_window(params)
    tol = tol if tol is not None else settings.DEFAULT_TOL
    kappa, m, a = params.kappa, params.m_kappa, params.a
    z = x / (params.c * kappa)
    g = math.gamma(m) * math.gamma(kappa)
    first_spec, second_spec = laplace_N_specs(params)
    first = wright_eval(first_spec, z, tol)
    second = wright_eval(second_spec, z, tol)
    zpow = z ** (a - 1.0)
    return (
        first.model_copy(update={"value": g * first.value, "abs_err": g * first.abs_err}),
        second.model_copy(
            update={"value": g * zpow * second.value, "abs_err": g * zpow * second.abs_err}
        ),
    )


def laplace_N(params: FamilyParams, x: float, tol: Optional[float] = None) -> float:
    """
    Laplace transform N(x) = E[exp(-x Sigma)]

    Assembled from the Wright pieces; when they agree to six or more leading
    digits the value is taken from the mixture representation instead.

    Raises:
        DomainError: outside the m_kappa window or x < 0
        PrecisionError: neither route reaches the tolerance
    """
    return laplace_N_eval(params, x, tol).value


def laplace_N_eval(params: FamilyParams, x: float, tol: Optional[float] = None) -> EvalResult:
    """laplace_N with its error estimate; method is quadrature when the mixture was used"""
    _check_window(params)
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x == 0:
        return EvalResult(value=1.0, abs_err=0.0, method=Method.SERIES, terms=1)
    try:
        first, second = laplace_N_pieces(params, x, tol)
        scaled = first.log_scale == 0 and second.log_scale == 0
    except PrecisionError as exc:
        logger.info(f"laplace_N({params.label()}, x={x}): Wright pieces failed ({exc})")
        scaled = False
    if scaled:
        value = first.value - second.value
        err = first.abs_err + second.abs_err
        piece = max(abs(first.value), abs(second.value))
        if abs(value) >= 1e-6 * piece and err <= 1e-8 * max(abs(value), 1e-300):
            return EvalResult(value=value, abs_err=err, method=first.method, terms=first.terms + second.terms)
        logger.debug(
            f"laplace_N({params.label()}, x={x}): cancellation {abs(value) / piece:.1e}, "
            "switching to the mixture integral"
        )
    value = mixture_integral(params, x)
    return EvalResult(value=value, abs_err=max(1e-8 * abs(value), 1e-9), method=Method.QUADRATURE, terms=1)


def laplace_N_tail(params: FamilyParams, x: float) -> float:
    """
    Leading large-x term of N for kappa < 1:
    -Gamma(kappa) Gamma(a + 1) / (Gamma(a - 1) Gamma(-kappa)) z^(-2),  z = x/(c kappa)
    """
    _check_window(params)
    kappa, a = params.kappa, params.a
    z = x / (params.c * kappa)
    return -math.gamma(kappa) * math.gamma(a + 1.0) / (math.gamma(a - 1.0) * gamma(-kappa)) / (z * z)


def mixture_integral(params: FamilyParams, x: float) -> float:
    """
    N(x) = (|M_delta| / (Gamma(a) k)) int_0^inf u^(a-1) 0Psi1((kappa, alpha delta) | -u) / (z + u) du

    Valid for every delta > kappa/alpha, also outside the m_kappa window.

    Raises:
        QuadratureError: quadrature error above 1e-9
    """
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    law = _law(params)
    z = x / law.k
    upper = _mixture_cutoff(law)
    breaks = [0.0] + [b for b in (1.0, 10.0, 50.0, 200.0) if b < upper] + [upper]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, err_head = integrate.quad(
            lambda u: _phi_negative(law, u) / (z + u) * u,
            0.0,
            breaks[1],
            weight="alg",
            wvar=(law.a - 2.0, 0.0),
            epsabs=1e-13,
            epsrel=1e-10,
            limit=200,
        )
        rest, err_rest = _piecewise(
            lambda u: u ** (law.a - 1.0) * _phi_negative(law, u) / (z + u), breaks[1:]
        )
    if err_head + err_rest > 1e-9:
        raise QuadratureError(f"mixture integral at x={x}: error {err_head + err_rest:.2e}")
    return law.prefactor / law.k * (head + rest)


def mode_function(params: FamilyParams, x: float, tol: float = 1e-8) -> float:
    """g(x) = 1Psi1((1, 1 + a); (kappa, alpha delta) | -x)"""
    spec = WrightSpec(upper=((1.0, 1.0 + params.a),), lower=((params.kappa, params.alpha * params.delta),))
    return wright_eval(spec, -x, tol).value


def mode(params: FamilyParams, n_grid: int = 1000) -> float:
    """
    Unique zero x* > 0 of g(x) = 1Psi1((1, 1 + a); (kappa, alpha delta) | -x)

    The density of Sigma peaks at y* = 1/(k x*).

    Raises:
        BracketError: no sign change, or more than one, on the log grid [1e-4, 1e4]
    """
    law = _law(params)
    grid = np.logspace(-4.0, 4.0, n_grid)
    values = np.array([mode_function(params, x) for x in grid])
    signs = np.sign(values)
    changes = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if len(changes) != 1:
        raise BracketError(
            f"{params.label()}: {len(changes)} sign changes of the mode function on the grid"
        )
    i = int(changes[0])
    root = optimize.bisect(
        lambda x: mode_function(params, x, 1e-12),
        grid[i],
        grid[i + 1],
        xtol=settings.BISECTION_XTOL,
        rtol=4 * np.finfo(float).eps,
    )
    logger.debug(f"{law!r}: mode function zero at x*={root:.6g}")
    return float(root)


def density_mode(params: FamilyParams) -> float:
    """Location y* = 1/(k x*) of the maximum of the density"""
    law = _law(params)
    return 1.0 / (law.k * mode(params))


def minus_functional_scale(kappa: float) -> float:
    """K = 1/(c kappa) with c the stable constant at alpha = kappa + 1"""
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa={kappa} outside (0, 1]")
    return 1.0 / (stable_constant(kappa + 1.0) * kappa)


def minus_functional_quantile(kappa: float, quantile_u: float) -> float:
    """
    Quantile of int_0^inf e^(-kappa xi_s) ds under P^(0), distributed as K E^(-kappa)
    with E standard exponential: K (-log u)^(-kappa)
    """
    if not 0 < quantile_u < 1:
        raise DomainError(f"quantile level {quantile_u} outside (0, 1)")
    return minus_functional_scale(kappa) * (-math.log(quantile_u)) ** (-kappa)


def minus_functional_cdf(kappa: float, t: float) -> float:
    """P(K E^(-kappa) <= t) = exp(-(t / K)^(-1/kappa))"""
    if t <= 0:
        return 0.0
    return math.exp(-((t / minus_functional_scale(kappa)) ** (-1.0 / kappa)))


def minus_functional_mean(kappa: float) -> float:
    """E[K E^(-kappa)] = K Gamma(1 - kappa) = -1/psi^(0)(-kappa); infinite at kappa = 1"""
    if kappa >= 1:
        return math.inf
    return minus_functional_scale(kappa) * math.gamma(1.0 - kappa)


def density_cdf(law: ExpFunctionalLaw, y: float) -> float:
    """P(Sigma <= y) by quadrature of the density"""
    if y <= 0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(lambda v: density(law, v), 0.0, y, epsabs=1e-11, limit=200)
    return min(max(value, 0.0), 1.0)


def density_cdf_table(law: ExpFunctionalLaw, grid: np.ndarray) -> np.ndarray:
    """CDF on an increasing grid by cumulative quadrature between nodes"""
    grid = np.asarray(grid, dtype=float)
    pieces = np.empty_like(grid)
    previous = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for i, y in enumerate(grid):
            piece, _ = integrate.quad(lambda v: density(law, v), previous, y, epsabs=1e-12, limit=100)
            pieces[i] = piece
            previous = y
    return np.clip(np.cumsum(pieces), 0.0, 1.0)


def laplace_of_density(law: ExpFunctionalLaw, x: float) -> float:
    """int_0^inf e^(-x y) f(y) dy by direct quadrature of the density"""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    y_mid = 1.0 / law.k
    y_far = y_mid + 40.0 / x
    nodes = [0.0, *[v for v in (y_mid, 10.0 * y_mid) if v < y_far], y_far]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(nodes[:-1], nodes[1:]):
            v, _ = integrate.quad(
                lambda y: math.exp(-x * y) * density(law, y), lo, hi, epsabs=1e-14, epsrel=1e-11, limit=200
            )
            total += v
    return total
