"""
Gamma-family and Bessel primitives on the real line
"""
import math
from typing import Tuple

import numpy as np
from scipy import integrate, special

from wrightlevy.app.core.config import settings
from wrightlevy.app.core.exceptions import DomainError, PoleError
from wrightlevy.app.core.logging import get_logger

logger = get_logger("wrightlevy.app.services.specfun")

EULER_GAMMA = float(np.euler_gamma)


def _check_finite(name: str, z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"{name}: argument must be finite, got {z}")
    return z


def near_pole(z: float, threshold: float = None) -> bool:
    """True when z lies within the pole threshold of a non-positive integer"""
    threshold = settings.POLE_THRESHOLD if threshold is None else threshold
    return z <= threshold and abs(z - round(z)) < threshold


def gamma(z: float) -> float:
    """
    Euler gamma function

    Args:
        z: Real argument away from the non-positive integers

    Returns:
        Gamma(z)

    Raises:
        PoleError: z within the pole threshold of 0, -1, -2, ...
        OverflowError: |Gamma(z)| not representable
    """
    z = _check_finite("gamma", z)
    if near_pole(z):
        raise PoleError(f"gamma: pole at z={z}")
    value = float(special.gamma(z))
    if not math.isfinite(value):
        raise OverflowError(f"gamma: |Gamma({z})| exceeds double range")
    return value


def log_gamma(z: float) -> Tuple[float, float]:
    """
    Log-magnitude and sign of Gamma(z)

    Returns:
        (log|Gamma(z)|, sign) with sign in {-1.0, +1.0}
    """
    z = _check_finite("log_gamma", z)
    if near_pole(z):
        raise PoleError(f"log_gamma: pole at z={z}")
    return float(special.gammaln(z)), float(special.gammasgn(z))


def rgamma(z: float) -> float:
    """1/Gamma(z), exactly 0 at the poles"""
    z = _check_finite("rgamma", z)
    if z <= 0 and z == round(z):
        return 0.0
    return float(special.rgamma(z))


def pochhammer(lam: float, alpha: float) -> float:
    """
    Pochhammer symbol (lam)_alpha = Gamma(lam + alpha) / Gamma(lam)

    Computed from log-gamma differences with the sign tracked separately.
    A pole of the denominator alone gives 0; poles in both gammas give the
    finite limit of the ratio.

    Raises:
        PoleError: lam + alpha at a pole while lam is not
    """
    lam = _check_finite("pochhammer", lam)
    alpha = _check_finite("pochhammer", alpha)
    top = lam + alpha
    top_pole = near_pole(top)
    bottom_pole = near_pole(lam)

    if bottom_pole and not top_pole:
        return 0.0
    if top_pole and not bottom_pole:
        raise PoleError(f"pochhammer: ({lam})_{alpha} is singular")
    if top_pole and bottom_pole:
        # Gamma(-m + e) / Gamma(-n + e) -> (-1)^(m-n) n! / m!
        n, m = -int(round(lam)), -int(round(top))
        ratio = math.exp(math.lgamma(n + 1) - math.lgamma(m + 1))
        return ratio if (m - n) % 2 == 0 else -ratio

    lg_top, s_top = log_gamma(top)
    lg_bot, s_bot = log_gamma(lam)
    log_mag = lg_top - lg_bot
    if log_mag > 709.0:
        raise OverflowError(f"pochhammer: ({lam})_{alpha} exceeds double range")
    return s_top * s_bot * math.exp(log_mag)


def digamma(z: float) -> float:
    """Digamma function Psi(z) = Gamma'(z)/Gamma(z)"""
    z = _check_finite("digamma", z)
    if near_pole(z):
        raise PoleError(f"digamma: pole at z={z}")
    return float(special.psi(z))


def incomplete_beta(x: float, a: float, b: float) -> float:
    """
    Non-regularized incomplete Beta function B(x; a, b)

    Args:
        x: Upper limit in [0, 1]
        a: First shape parameter, a > 0
        b: Second shape parameter, b > 0

    Returns:
        Integral of v^(a-1) (1-v)^(b-1) over [0, x]

    Raises:
        DomainError: parameters outside the stated ranges
    """
    x, a, b = float(x), float(a), float(b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete_beta: x={x} outside [0, 1]")
    if a <= 0 or b <= 0:
        raise DomainError(f"incomplete_beta: need a > 0 and b > 0, got a={a}, b={b}")
    if x == 0.0:
        return 0.0
    log_beta = special.betaln(a, b)
    regularized = special.betainc(a, b, x)
    if regularized == 0.0:
        # Regularized value underflowed; integrate directly in that corner
        value, _ = integrate.quad(
            lambda v: v ** (a - 1.0) * (1.0 - v) ** (b - 1.0), 0.0, x, epsabs=0.0
        )
        return float(value)
    return float(regularized * math.exp(log_beta))


def incomplete_beta_quad(x: float, a: float, b: float) -> float:
    """
    B(x; a, b) by direct quadrature, valid for any real b when x < 1

    Used where b <= 0 rules out the closed routine.
    """
    x, a, b = float(x), float(a), float(b)
    if not 0.0 <= x < 1.0:
        raise DomainError(f"incomplete_beta_quad: x={x} outside [0, 1)")
    if a <= 0:
        raise DomainError(f"incomplete_beta_quad: need a > 0, got a={a}")
    if x == 0.0:
        return 0.0
    if a < 1.0:
        # algebraic weight takes the v^(a-1) endpoint singularity
        value, _ = integrate.quad(
            lambda v: (1.0 - v) ** (b - 1.0),
            0.0,
            x,
            weight="alg",
            wvar=(a - 1.0, 0.0),
            epsabs=0.0,
            epsrel=1e-12,
        )
    else:
        value, _ = integrate.quad(
            lambda v: v ** (a - 1.0) * (1.0 - v) ** (b - 1.0),
            0.0,
            x,
            epsabs=0.0,
            epsrel=1e-12,
            limit=200,
        )
    return float(value)


def bessel_i(nu: float, x: float) -> float:
    """
    Modified Bessel function of the first kind by its power series

    Sums (x/2)^(2k+nu) / (k! Gamma(k+nu+1)) until the next term is below
    1e-16 of the partial sum; large x is handed to scipy.special.iv.
    At x = 0 the value is 1 for nu = 0, 0 for nu > 0 and inf for -1 < nu < 0.

    Raises:
        DomainError: x < 0 or nu <= -1
    """
    nu, x = float(nu), float(x)
    if x < 0 or nu <= -1:
        raise DomainError(f"bessel_i: need x >= 0 and nu > -1, got nu={nu}, x={x}")
    if x == 0.0:
        if nu < 0.0:
            return math.inf
        return 1.0 if nu == 0.0 else 0.0
    if x > 50.0:
        return float(special.iv(nu, x))

    half = 0.5 * x
    log_term = nu * math.log(half) - math.lgamma(nu + 1.0)
    term = math.exp(log_term)
    total = term
    k = 0
    quarter = half * half
    while True:
        k += 1
        term *= quarter / (k * (k + nu))
        total += term
        if term < 1e-16 * total:
            break
    return total
