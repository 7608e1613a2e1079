"""
Laplace exponents psi^(gamma) and psi^(0,delta), their triplets, moments,
roots and scale functions
"""
import functools
import math
import warnings
from typing import Callable, Tuple, Union

import numpy as np
from scipy import integrate, optimize, special

from wrightlevy.app.core.config import settings
from wrightlevy.app.core.exceptions import (
    BracketError,
    ConsistencyError,
    DomainError,
    PrecisionError,
    QuadratureError,
)
from wrightlevy.app.core.logging import get_logger
from wrightlevy.app.schemas.levy import Compensation, LevyTriplet, LongTimeBehaviour
from wrightlevy.app.schemas.params import Family, FamilyParams, stable_constant
from wrightlevy.app.services.specfun import (
    digamma,
    gamma,
    incomplete_beta,
    incomplete_beta_quad,
    near_pole,
    pochhammer,
)

logger = get_logger("wrightlevy.app.services.levy")

ArrayLike = Union[float, np.ndarray]

# (e - 1) / e, the image of y = -1 under v = 1 - e^y
X_CUT = 1.0 - math.exp(-1.0)


def _require(params: FamilyParams, family: Family):
    if params.family is not family:
        raise DomainError(f"{family.value}-family parameters required, got {params.label()}")


def psi_zero(alpha: float, lam: float) -> float:
    """psi^(0)(lam) = c (lam)_alpha"""
    if lam == 0:
        return 0.0
    return stable_constant(alpha) * pochhammer(lam, alpha)


def psi_gamma(params: FamilyParams, lam: float) -> float:
    """
    Laplace exponent psi^(gamma)(lam) = c ((lam + gamma)_alpha - (gamma)_alpha)

    Raises:
        DomainError: lam <= -(gamma + alpha), outside the analyticity strip
    """
    _require(params, Family.GAMMA)
    lam = float(lam)
    g, alpha = params.gamma, params.alpha
    if lam <= -(g + alpha):
        raise DomainError(f"lambda={lam} below the strip -(gamma + alpha)={-(g + alpha)}")
    if lam == 0.0:
        return 0.0
    return params.c * (pochhammer(lam + g, alpha) - pochhammer(g, alpha))


def psi_delta_from_gamma(params: FamilyParams, lam: float) -> float:
    """psi^(0)(lam) (1 - alpha delta / (lam + kappa))"""
    _require(params, Family.DELTA)
    if lam + params.kappa == 0:
        raise DomainError("second form undefined at lam = -kappa")
    return psi_zero(params.alpha, lam) * (1.0 - params.alpha * params.delta / (lam + params.kappa))


def psi_delta(params: FamilyParams, lam: float) -> float:
    """
    Laplace exponent psi^(0,delta)(lam) = c (lam + kappa - alpha delta) (lam)_kappa

    The value is cross-checked against psi^(0)(lam)(1 - alpha delta/(lam + kappa)).

    Raises:
        PoleError: gamma pole in (lam)_kappa
        ConsistencyError: the two forms disagree beyond 1e-12 relative
    """
    _require(params, Family.DELTA)
    lam = float(lam)
    if lam == 0.0:
        return 0.0
    kappa = params.kappa
    value = params.c * (lam + kappa - params.alpha * params.delta) * pochhammer(lam, kappa)
    if lam + kappa != 0 and not near_pole(lam + params.alpha):
        other = psi_delta_from_gamma(params, lam)
        # log-gamma differences lose about eps * |lam log lam| of relative accuracy
        rel = 1e-12 + 4e-16 * abs(lam) * math.log(2.0 + abs(lam))
        if abs(value - other) > rel * max(abs(value), abs(other)):
            raise ConsistencyError(
                f"psi_delta forms disagree at lam={lam}: {value!r} vs {other!r}"
            )
    return value


def log_psi_delta(params: FamilyParams, lam: np.ndarray) -> np.ndarray:
    """log psi^(0,delta) on an array where psi^(0,delta) > 0"""
    lam = np.asarray(lam, dtype=float)
    linear = lam + params.kappa - params.alpha * params.delta
    if np.any(linear <= 0) or np.any(lam <= 0):
        raise DomainError("log_psi_delta needs psi^(0,delta) > 0 on the whole array")
    return (
        math.log(params.c)
        + np.log(linear)
        + special.gammaln(lam + params.kappa)
        - special.gammaln(lam)
    )


def mean_delta(params: FamilyParams) -> float:
    """M_delta = c Gamma(alpha)(1 - alpha delta / kappa)"""
    _require(params, Family.DELTA)
    return params.M_delta


def negative_mean(params: FamilyParams) -> bool:
    _require(params, Family.DELTA)
    return params.negative_mean


def levy_density_gamma(params: FamilyParams, y: ArrayLike) -> ArrayLike:
    """
    Levy density c_alpha e^((alpha + gamma) y) / (1 - e^y)^(alpha + 1) on y < 0

    Raises:
        DomainError: any y >= 0
    """
    _require(params, Family.GAMMA)
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr >= 0):
        raise DomainError("Levy density is supported on y < 0")
    one_minus = -np.expm1(y_arr)
    value = params.c_alpha * np.exp((params.alpha + params.gamma) * y_arr) / one_minus ** (
        params.alpha + 1.0
    )
    return float(value) if np.ndim(value) == 0 else value


def levy_density_delta(params: FamilyParams, y: ArrayLike) -> ArrayLike:
    """Levy density c_alpha e^(alpha y)(1 - e^y)^(-alpha - 1)(1 + delta(e^-y - 1))"""
    _require(params, Family.DELTA)
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr >= 0):
        raise DomainError("Levy density is supported on y < 0")
    one_minus = -np.expm1(y_arr)
    value = (
        params.c_alpha
        * np.exp(params.alpha * y_arr)
        / one_minus ** (params.alpha + 1.0)
        * (1.0 + params.delta * np.expm1(-y_arr))
    )
    return float(value) if np.ndim(value) == 0 else value


def _drift_tilde_term(alpha: float, g: float, k: int) -> float:
    b = alpha + g - 1.0
    shape = k + 1.0 - alpha
    if b == 0.0:
        beta_part = 0.0
    elif b > 0.0:
        beta_part = b * incomplete_beta(X_CUT, shape, b)
    else:
        beta_part = b * incomplete_beta_quad(X_CUT, shape, b)
    boundary = X_CUT ** (k - alpha) * math.exp(-b)
    return (beta_part + boundary) / (k * (k - alpha))


def drift_tilde(params: FamilyParams) -> float:
    """
    Drift of psi^(gamma) under the truncated compensation lam y 1{|y| < 1}

        c~ = -c_alpha sum_k [b B(X; k + 1 - alpha, b) + X^(k - alpha) e^(-b)] / (k (k - alpha))

    with X = (e - 1)/e and b = alpha + gamma - 1. For b < 0 the incomplete
    Beta is integrated directly.

    Raises:
        PrecisionError: 10^5 terms without convergence
    """
    _require(params, Family.GAMMA)
    alpha, g = params.alpha, params.gamma
    total = 0.0
    for k in range(1, 100_001):
        term = _drift_tilde_term(alpha, g, k)
        total += term
        if abs(term) < 1e-12 * abs(total):
            logger.debug(f"drift_tilde({params.label()}) converged after {k} terms")
            return -params.c_alpha * total
    raise PrecisionError(f"drift_tilde({params.label()}) did not converge")


def mean_gamma(params: FamilyParams) -> float:
    """
    E^(gamma)[xi_1] = c (gamma)_alpha (Psi(gamma + alpha) - Psi(gamma))

    At gamma = -m (m = 0, 1) the removable limit c Gamma(alpha - m)(-1)^m m!
    is returned.
    """
    _require(params, Family.GAMMA)
    g, alpha, c = params.gamma, params.alpha, params.c
    if near_pole(g):
        m = -int(round(g))
        return c * gamma(alpha - m) * (-1.0) ** m * math.factorial(m)
    return c * pochhammer(g, alpha) * (digamma(g + alpha) - digamma(g))


def _mean_at(alpha: float, g: float) -> float:
    return mean_gamma(FamilyParams(alpha=alpha, gamma=g))


def gamma_alpha_root(alpha: float) -> float:
    """
    The gamma in (-1, 0) at which E^(gamma)[xi_1] vanishes, by bisection

    Raises:
        BracketError: no sign change between gamma = -1 and gamma = 0
    """
    lo, hi = _mean_at(alpha, -1.0), _mean_at(alpha, 0.0)
    if not lo < 0 < hi:
        raise BracketError(f"no sign change of the mean on (-1, 0) at alpha={alpha}")
    return float(
        optimize.bisect(
            lambda g: _mean_at(alpha, g), -1.0, 0.0, xtol=settings.BISECTION_XTOL, rtol=4 * np.finfo(float).eps
        )
    )


def cramer_root(params: FamilyParams) -> float:
    """
    Positive root of the Laplace exponent in the negative-mean regime

    For the delta family this is theta = alpha delta - kappa.

    Raises:
        DomainError: mean not negative, so no positive root exists
    """
    if params.family is Family.DELTA:
        if not params.negative_mean:
            raise DomainError(f"{params.label()}: delta <= kappa/alpha, no Cramer root")
        return params.alpha * params.delta - params.kappa

    if params.gamma >= gamma_alpha_root(params.alpha):
        raise DomainError(f"{params.label()}: gamma >= gamma_alpha, no Cramer root")
    lo = 1e-8
    if psi_gamma(params, lo) >= 0:
        raise BracketError(f"{params.label()}: psi not negative near 0")
    hi = 1.0
    while psi_gamma(params, hi) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e8:
            raise BracketError(f"{params.label()}: no sign change of psi below 1e8")
    return float(
        optimize.bisect(
            lambda lam: psi_gamma(params, lam), lo, hi, xtol=settings.BISECTION_XTOL, rtol=4 * np.finfo(float).eps
        )
    )


def long_time_classification(params: FamilyParams) -> LongTimeBehaviour:
    """Drift to +inf, oscillation or drift to -inf from the sign of the mean"""
    if params.family is Family.GAMMA:
        gap = params.gamma - gamma_alpha_root(params.alpha)
    else:
        gap = params.kappa / params.alpha - params.delta
    if abs(gap) < 1e-12:
        return LongTimeBehaviour.OSCILLATES
    return (
        LongTimeBehaviour.DRIFTS_TO_PLUS_INF if gap > 0 else LongTimeBehaviour.DRIFTS_TO_MINUS_INF
    )


def scale_function(params: FamilyParams, x: float) -> float:
    """
    Scale function W^(gamma)(x) = e^(-gamma x)(1 - e^(-x))^(alpha - 1) / (c Gamma(alpha))

    Normalized so that its Laplace transform is 1/psi^(gamma).

    Raises:
        DomainError: gamma not in {0, -1}, or x <= 0
    """
    _require(params, Family.GAMMA)
    if params.gamma not in (0.0, -1.0):
        raise DomainError("scale function is available for gamma in {0, -1} only")
    if not x > 0:
        raise DomainError(f"scale function needs x > 0, got {x}")
    alpha = params.alpha
    return (
        math.exp(-params.gamma * x)
        * (-math.expm1(-x)) ** (alpha - 1.0)
        / (params.c * math.gamma(alpha))
    )


def scale_function_laplace(params: FamilyParams, lam: float) -> float:
    """int_0^inf e^(-lam x) W(x) dx by quadrature; finite above the Cramer root"""
    _require(params, Family.GAMMA)
    if lam + params.gamma <= 0:
        raise DomainError(f"transform diverges at lam={lam}")
    alpha = params.alpha
    head, err_head = integrate.quad(
        lambda x: math.exp(-lam * x) * scale_function(params, x) / x ** (alpha - 1.0)
        if x > 0
        else 1.0 / (params.c * math.gamma(alpha)),
        0.0,
        1.0,
        weight="alg",
        wvar=(alpha - 1.0, 0.0),
        epsabs=0.0,
        epsrel=1e-11,
    )
    tail, err_tail = integrate.quad(
        lambda x: math.exp(-lam * x) * scale_function(params, x),
        1.0,
        math.inf,
        epsabs=0.0,
        epsrel=1e-11,
        limit=200,
    )
    return head + tail


def esscher_weight(params: FamilyParams, g: float, t: float, xi_t: ArrayLike) -> ArrayLike:
    """Density of P^(gamma) w.r.t. P^(0) on F_t: exp(gamma xi_t - psi^(0)(gamma) t)"""
    if g <= -params.alpha:
        raise DomainError(f"gamma={g} outside K")
    weight = np.exp(g * np.asarray(xi_t, dtype=float) - psi_zero(params.alpha, g) * t)
    return float(weight) if np.ndim(weight) == 0 else weight


def power_transform(
    exponent: Callable[[float], float], beta: float, sigma: float = 0.0
) -> Callable[[float], float]:
    """
    Exponent of the beta-power transformed process:
    lam -> exponent(beta lam) + (sigma / 2) beta (beta - 1) lam
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if sigma < 0:
        raise DomainError(f"sigma must be nonnegative, got {sigma}")

    def transformed(lam: float) -> float:
        return exponent(beta * lam) + 0.5 * sigma * beta * (beta - 1.0) * lam

    return transformed


def stable_limit_exponent(params: FamilyParams, lam: float, eta: float) -> Tuple[float, float]:
    """
    Small-time rescaling eta psi^(0)(eta^(-1/alpha) lam) and its stable limit c lam^alpha

    Returns:
        (rescaled exponent, c lam^alpha)
    """
    alpha = params.alpha
    scaled = eta * psi_zero(alpha, eta ** (-1.0 / alpha) * lam)
    return scaled, params.c * lam**alpha


def brownian_limit_exponent(g: float, lam: float) -> float:
    """lam^2 / 2 + (gamma + 1/2) lam, the alpha -> 2 limit of psi^(gamma)"""
    return 0.5 * lam * lam + (g + 0.5) * lam


def _expm1_minus_x(x: float) -> float:
    """e^x - 1 - x without cancellation"""
    if abs(x) < 1e-2:
        term, total = x * x / 2.0, 0.0
        n = 2
        while abs(term) > 1e-18 * abs(total) or total == 0.0:
            total += term
            n += 1
            term *= x / n
            if n > 30:
                break
        return total
    return math.expm1(x) - x


def _compensated(lam: float, y: float, compensation: Compensation) -> float:
    if compensation is Compensation.FULL or y > -1.0:
        return _expm1_minus_x(lam * y)
    return math.expm1(lam * y)


def triplet_gamma(params: FamilyParams) -> LevyTriplet:
    """Triplet of psi^(gamma) with truncated compensation and drift c~_alpha"""
    _require(params, Family.GAMMA)
    return LevyTriplet(
        drift=drift_tilde(params),
        levy_density=functools.partial(levy_density_gamma, params),
        compensation=Compensation.TRUNCATED,
        mean=mean_gamma(params),
    )


def triplet_delta(params: FamilyParams) -> LevyTriplet:
    """Triplet of psi^(0,delta) with full compensation and drift M_delta"""
    _require(params, Family.DELTA)
    return LevyTriplet(
        drift=params.M_delta,
        levy_density=functools.partial(levy_density_delta, params),
        compensation=Compensation.FULL,
        mean=params.M_delta,
    )


def exponent_from_triplet(triplet: LevyTriplet, lam: float) -> float:
    """
    Levy-Khintchine exponent rebuilt by quadrature:
    drift lam + sigma lam^2 / 2 + int (e^(lam y) - 1 - lam y [1{|y|<1}]) nu(dy)

    Raises:
        QuadratureError: quadrature error estimate above 1e-9
    """
    density = triplet.levy_density

    def integrand(y: float) -> float:
        return _compensated(lam, y, triplet.compensation) * density(y)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        near, err_near = integrate.quad(integrand, -1.0, 0.0, epsabs=1e-13, epsrel=1e-11, limit=500)
        far, err_far = integrate.quad(integrand, -math.inf, -1.0, epsabs=1e-13, epsrel=1e-11, limit=500)
    if err_near + err_far > 1e-9 * max(1.0, abs(near + far)):
        raise QuadratureError(
            f"Levy-Khintchine integral at lam={lam}: error {err_near + err_far:.2e}"
        )
    return triplet.drift * lam + 0.5 * triplet.diffusion * lam * lam + near + far


def drift_tilde_from_mean(params: FamilyParams) -> float:
    """c~_alpha = E[xi_1] - int_{-inf}^{-1} y nu(dy), by quadrature"""
    _require(params, Family.GAMMA)
    big, _ = integrate.quad(
        lambda y: y * levy_density_gamma(params, y), -math.inf, -1.0, epsabs=0.0, epsrel=1e-12, limit=200
    )
    return mean_gamma(params) - big


def _identity_numerator(v: float, lam: float, b: float) -> float:
    """((1 - v)^lam - 1)(1 - v)^b + lam v, accurate for small v"""
    log1m = math.log1p(-v)
    lam_log = lam * log1m
    # log1p(-v) + v, series for small v
    if v < 1e-3:
        tail = -sum(v**j / j for j in range(2, 12))
    else:
        tail = log1m + v
    head = _expm1_minus_x(lam_log) + lam * tail  # e^(lam L) - 1 + lam v
    return head + math.expm1(lam_log) * math.expm1(b * log1m)


def verify_integral_identity(alpha: float, g: float, lam: float) -> Tuple[float, float]:
    """
    Quadrature check of
        c_alpha int_0^1 [(u^lam - 1) u^(alpha+gamma-1) - lam (u - 1)] / (1 - u)^(alpha+1) du
            = c((lam + gamma)_alpha - (gamma)_alpha) - c_alpha lam / (alpha - 1)

    The integral runs in v = 1 - u; the v^(1-alpha) endpoint behaviour is
    handled by an algebraic quadrature weight.

    Returns:
        (lhs, rhs)

    Raises:
        DomainError: parameters outside 1 < alpha < 2, alpha + gamma > 0, lam > 0
        QuadratureError: quadrature cannot certify 1e-10 absolute accuracy
    """
    if not (1 < alpha < 2 and alpha + g > 0 and lam > 0):
        raise DomainError(f"identity needs 1<alpha<2, alpha+gamma>0, lam>0; got {alpha}, {g}, {lam}")
    params = FamilyParams(alpha=alpha, gamma=g)
    b = alpha + g - 1.0

    def near_zero(v: float) -> float:
        if v == 0.0:
            return 0.5 * lam * (lam - 1.0) + lam * b
        return _identity_numerator(v, lam, b) / (v * v)

    def near_one(v: float) -> float:
        if b < 0:
            # (1 - v)^b carried by the quadrature weight
            u = 1.0 - v
            return ((u**lam - 1.0) + lam * v * u ** (-b)) / v ** (alpha + 1.0)
        return _identity_numerator(v, lam, b) / v ** (alpha + 1.0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        left, err_left = integrate.quad(
            near_zero, 0.0, 0.5, weight="alg", wvar=(1.0 - alpha, 0.0), epsabs=1e-14, epsrel=1e-12
        )
        if b < 0:
            right, err_right = integrate.quad(
                near_one, 0.5, 1.0, weight="alg", wvar=(0.0, b), epsabs=1e-14, epsrel=1e-12
            )
        else:
            right, err_right = integrate.quad(near_one, 0.5, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    if err_left + err_right > 1e-10 * max(1.0, abs(left + right)):
        raise QuadratureError(
            f"identity quadrature at ({alpha}, {g}, {lam}): error {err_left + err_right:.2e}"
        )
    lhs = params.c_alpha * (left + right)
    rhs = psi_gamma(params, lam) - params.c_alpha * lam / (alpha - 1.0)
    return lhs, rhs
