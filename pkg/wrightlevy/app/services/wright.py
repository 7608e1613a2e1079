"""
Evaluation of the Wright hypergeometric functions pPsiq

    pPsiq(z) = sum_n  prod Gamma(A_i n + a_i) / prod Gamma(B_j n + b_j) * z^n / n!

Series terms are produced in blocks from log-gamma values with the sign
tracked separately. When the alternating series cancels beyond what double
precision can carry, the same series is summed again in mpmath with the
working precision raised by the number of digits lost. Large arguments use
the leading exponential (z > 0) or algebraic (1Psi1 at -y) expansions.
"""
import math
from typing import List, Optional, Tuple

import mpmath
import numpy as np
from scipy import special

from wrightlevy.app.core.config import settings
from wrightlevy.app.core.exceptions import DomainError, PoleError, PrecisionError
from wrightlevy.app.core.logging import get_logger
from wrightlevy.app.schemas.wright import EvalResult, Method, WrightSpec

logger = get_logger("wrightlevy.app.services.wright")

BLOCK = 64
EPS = np.finfo(float).eps
MIN_TOL = 1e-14
# double pass is skipped when it would lose more digits than this
DOUBLE_DIGITS_BUDGET = 15.0


def _check_tol(tol: Optional[float]) -> float:
    tol = settings.DEFAULT_TOL if tol is None else float(tol)
    if not tol >= MIN_TOL:
        raise DomainError(f"tol={tol} below the supported floor {MIN_TOL}")
    return tol


def meets_tolerance(result: EvalResult, tol: float) -> bool:
    """abs_err <= tol * max(1, |value|), relative only for rescaled values"""
    if result.log_scale > 0:
        return result.abs_err <= tol * abs(result.value)
    return result.abs_err <= tol * max(1.0, abs(result.value))


def series_plan(spec: WrightSpec, z: float) -> Tuple[float, int, float]:
    """
    Size of the series at z

    Returns:
        (peak index, estimated terms to convergence, log10 of the largest term)
    """
    if z == 0:
        return 0.0, 1, 0.0
    n_peak = (spec.T * abs(z)) ** (1.0 / spec.S)
    n_est = int(math.ceil(3.0 * n_peak + 30))
    log10_max = spec.S * n_peak / math.log(10.0)
    return n_peak, n_est, log10_max


def _log_terms(
    spec: WrightSpec, n: np.ndarray, log_abs_z: float, z_negative: bool
) -> Tuple[np.ndarray, np.ndarray]:
    """log|term_n| and sign(term_n) for a block of indices"""
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = n * log_abs_z - special.gammaln(n + 1.0)
        sign = np.where(z_negative & (n % 2 == 1), -1.0, 1.0)
        for A, a in spec.upper:
            arg = A * n + a
            log_mag = log_mag + special.gammaln(arg)
            sign = sign * special.gammasgn(arg)
        for B, b in spec.lower:
            arg = B * n + b
            pole = (arg <= 0) & (arg == np.round(arg))
            log_mag = log_mag - np.where(pole, 0.0, special.gammaln(arg))
            sign = sign * np.where(pole, 0.0, special.gammasgn(arg))
            log_mag = np.where(pole, -np.inf, log_mag)
    return log_mag, sign


def _stop_index(
    abs_terms: np.ndarray, partial: np.ndarray, tol: float, prev_tail, abs_before: float
):
    """
    First index closing a run of three small, decreasing terms

    A term is small below tol * |partial sum| or below the rounding level of
    the sum so far. prev_tail carries (last |term|, run length) across blocks.
    """
    last_abs, run = prev_tail
    running_abs = abs_before + np.cumsum(abs_terms)
    for i in range(abs_terms.size):
        t = abs_terms[i]
        small = t == 0.0 or t < tol * abs(partial[i]) or t < EPS * running_abs[i]
        decreasing = t <= last_abs
        run = run + 1 if (small and decreasing) else 0
        last_abs = t
        if run >= 3:
            return i, (last_abs, run)
    return None, (last_abs, run)


def _series_double(spec: WrightSpec, z: float, tol: float, cap: int):
    """
    Double-precision summation

    Returns:
        (value, truncation bound, sum of |terms|, terms used) or None when a
        term overflows the double range
    """
    log_abs_z = math.log(abs(z))
    z_negative = z < 0
    total = 0.0
    abs_total = 0.0
    tail = (math.inf, 0)
    start = 0
    while start <= cap:
        n = np.arange(start, min(start + BLOCK, cap + 1), dtype=float)
        log_mag, sign = _log_terms(spec, n, log_abs_z, z_negative)
        if np.any(log_mag > 700.0):
            return None
        terms = sign * np.exp(log_mag)
        partial = total + np.cumsum(terms)
        abs_terms = np.abs(terms)
        idx, tail = _stop_index(abs_terms, partial, tol, tail, abs_total)
        if idx is not None:
            abs_total += float(abs_terms[: idx + 1].sum())
            return float(partial[idx]), float(abs_terms[idx]), abs_total, start + idx + 1
        total = float(partial[-1])
        abs_total += float(abs_terms.sum())
        start += BLOCK
    raise PrecisionError(
        f"{spec.label()}: series did not converge within {cap} terms at z={z}",
        result=EvalResult(
            value=total,
            abs_err=abs_total,
            method=Method.SERIES,
            terms=cap,
        ),
    )


def _series_mp(spec: WrightSpec, z: float, tol: float, cap: int, dps: int):
    """Extended-precision summation at `dps` decimal digits"""
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        power = mpmath.mpf(1)
        total = mpmath.mpf(0)
        abs_total = mpmath.mpf(0)
        last_abs = mpmath.inf
        run = 0
        floor = mpmath.mpf(10) ** (-dps)
        for n in range(cap + 1):
            if n > 0:
                power = power * zz / n
            coef = mpmath.mpf(1)
            for A, a in spec.upper:
                coef *= mpmath.gamma(mpmath.mpf(A) * n + mpmath.mpf(a))
            for B, b in spec.lower:
                coef *= mpmath.rgamma(mpmath.mpf(B) * n + mpmath.mpf(b))
            term = coef * power
            total += term
            t = abs(term)
            abs_total += t
            small = t == 0 or t < tol * abs(total) or t < abs_total * floor
            run = run + 1 if (small and t <= last_abs) else 0
            last_abs = t
            if run >= 3:
                rounding = abs_total * mpmath.mpf(10) ** (2 - dps)
                return float(total), float(t), float(rounding), n + 1
    raise PrecisionError(
        f"{spec.label()}: extended-precision series exceeded {cap} terms at z={z}",
        result=EvalResult(
            value=float(total), abs_err=float(abs_total), method=Method.SERIES, terms=cap
        ),
    )


def wright_series(
    spec: WrightSpec, z: float, tol: Optional[float] = None
) -> EvalResult:
    """
    Sum the convergent pPsiq series

    Stops once three consecutive terms are each below tol * |partial sum|
    with decreasing magnitudes. The reported abs_err adds the last term to
    a rounding bound; when rounding dominates, the sum is redone in mpmath.

    Args:
        spec: Validated Wright coefficients
        z: Real argument
        tol: Relative tolerance (floor 1e-14)

    Returns:
        EvalResult with method=series

    Raises:
        PrecisionError: term cap reached or required precision above
            MAX_WORKING_DPS (best-effort result attached)
        PoleError: a gamma argument hits a pole
    """
    tol = _check_tol(tol)
    cap = settings.SERIES_TERM_CAP
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"z={z} is not finite")

    if z == 0.0:
        log_mag, sign = _log_terms(spec, np.zeros(1), 0.0, False)
        value = float(sign[0] * np.exp(log_mag[0]))
        return EvalResult(value=value, abs_err=0.0, method=Method.SERIES, terms=1)

    _, n_est, log10_max = series_plan(spec, z)
    if n_est > cap:
        raise PrecisionError(
            f"{spec.label()}: about {n_est} terms needed at z={z}, cap is {cap}"
        )

    double = None
    if log10_max <= DOUBLE_DIGITS_BUDGET + 2:
        double = _series_double(spec, z, tol, cap)
    if double is not None:
        value, trunc, abs_total, terms = double
        rounding = 4.0 * EPS * abs_total
        result = EvalResult(
            value=value, abs_err=trunc + rounding, method=Method.SERIES, terms=terms
        )
        if meets_tolerance(result, tol):
            return result
        log10_sum = math.log10(max(abs_total, 1.0))
    else:
        log10_sum = max(log10_max, 0.0)

    dps = int(math.ceil(log10_sum + math.log10(1.0 / tol))) + 12
    if dps > settings.MAX_WORKING_DPS:
        raise PrecisionError(
            f"{spec.label()}: z={z} needs {dps} digits, ceiling is "
            f"{settings.MAX_WORKING_DPS}",
            result=result if double is not None else None,
        )
    logger.debug(f"{spec.label()} at z={z}: extended precision with dps={dps}")
    value, trunc, rounding, terms = _series_mp(spec, z, tol, cap, dps)
    return EvalResult(
        value=value, abs_err=trunc + rounding, method=Method.SERIES, terms=terms
    )


def wright_exponential_asymptotic(spec: WrightSpec, z: float) -> EvalResult:
    """
    Leading term of the exponentially infinite expansion on z > 0

        E0(z) = (1/S) exp(Z^(1/S)) H0 Z^((1-G)/S),  Z = T S^S z

    abs_err is |E0| * Z^(-1/S), the size of the first neglected order. When
    E0 overflows a double the result carries log_scale.

    Raises:
        DomainError: z <= 0
    """
    z = float(z)
    if not z > 0:
        raise DomainError(f"exponential asymptotic needs z > 0, got z={z}")
    S, G = spec.S, spec.G
    log_Z = math.log(spec.T) + S * math.log(S) + math.log(z)
    log_value = (
        -math.log(S)
        + math.exp(log_Z / S)
        + math.log(spec.H0)
        + (1.0 - G) / S * log_Z
    )
    rel_err = math.exp(-log_Z / S)
    log_scale = 0.0
    if log_value > 700.0:
        log_scale = log_value
        log_value = 0.0
    value = math.exp(log_value)
    return EvalResult(
        value=value,
        abs_err=value * rel_err,
        method=Method.ASYMPTOTIC_EXPONENTIAL,
        terms=1,
        log_scale=log_scale,
    )


def near_nonpositive_integer(x: float) -> bool:
    return x <= 0 and abs(x - round(x)) < 1e-12


def _algebraic_term(a1: float, A1: float, b1: float, B1: float, y: float, k: int):
    s_k = (a1 + k) / A1
    if near_nonpositive_integer(s_k):
        raise PoleError(f"residue {k} collides with a pole of Gamma(s)")
    lg = special.gammaln(s_k) - special.gammaln(k + 1.0) - s_k * math.log(y)
    inv = special.rgamma(b1 - B1 * s_k)
    return ((-1.0) ** k) * special.gammasgn(s_k) * math.exp(lg) * inv / A1


def exponential_remainder(spec: WrightSpec, y: float) -> float:
    """
    Size of the exponentially small part of pPsiq(-y) that an algebraic
    expansion leaves out; infinite when it is not small (S >= 2)
    """
    S = spec.S
    if S <= 2.0 / 3.0:
        return 0.0
    cos_theta = math.cos(math.pi / S)
    if cos_theta >= 0:
        return math.inf
    log_Z = math.log(spec.T) + S * math.log(S) + math.log(y)
    log_mag = (
        math.log(2.0 / S)
        + math.log(spec.H0)
        + math.exp(log_Z / S) * cos_theta
        + (1.0 - spec.G) / S * log_Z
    )
    return math.exp(log_mag) if log_mag > -745.0 else 0.0


def wright_algebraic_asymptotic_1psi1(
    a1: float, A1: float, b1: float, B1: float, y: float, n_terms: int = 6
) -> EvalResult:
    """
    Algebraic expansion of 1Psi1((A1, a1); (B1, b1) | -y) for large y

    Residue sum (1/A1) sum_k (-1)^k/k! Gamma((a1+k)/A1) / Gamma(b1 - B1 (a1+k)/A1)
    y^(-(a1+k)/A1). Terms with 1/Gamma at a pole are exactly 0. abs_err is
    the first nonzero neglected term plus the exponentially small part of
    the function, which the residue sum does not see.

    Args:
        a1, A1: numerator pair
        b1, B1: denominator pair
        y: positive magnitude of the argument
        n_terms: retained terms (at most 10)

    Raises:
        DomainError: y <= 0, n_terms out of range, or the first nonzero
            term does not dominate the next one
    """
    y = float(y)
    if not y > 0:
        raise DomainError(f"algebraic asymptotic needs y > 0, got y={y}")
    if not 1 <= n_terms <= 10:
        raise DomainError(f"n_terms={n_terms} must lie in [1, 10]")
    if A1 <= 0 or B1 <= 0:
        raise DomainError("scales must be positive")

    terms: List[float] = [
        _algebraic_term(a1, A1, b1, B1, y, k) for k in range(n_terms + 12)
    ]
    retained = terms[:n_terms]
    nonzero = [abs(t) for t in terms if t != 0.0]
    if len(nonzero) >= 2 and nonzero[0] <= nonzero[1]:
        raise DomainError(
            f"y={y} too small: leading residue term does not dominate the next"
        )
    neglected = next((abs(t) for t in terms[n_terms:] if t != 0.0), 0.0)
    remainder = exponential_remainder(
        WrightSpec(upper=((A1, a1),), lower=((B1, b1),)), y
    )
    if not math.isfinite(remainder):
        raise DomainError("exponential terms dominate on the negative axis (S >= 2)")
    return EvalResult(
        value=float(sum(retained)),
        abs_err=float(neglected + remainder),
        method=Method.ASYMPTOTIC_ALGEBRAIC,
        terms=n_terms,
    )


def double_feasible(spec: WrightSpec, z: float, tol: float) -> bool:
    """True when the double-precision series can reach tol at z"""
    _, n_est, log10_max = series_plan(spec, z)
    return n_est <= settings.SERIES_TERM_CAP and (
        log10_max + math.log10(1.0 / tol) <= DOUBLE_DIGITS_BUDGET + 1.0
    )


def wright_eval(spec: WrightSpec, z: float, tol: Optional[float] = None) -> EvalResult:
    """
    Evaluate pPsiq(z) with the cheapest method that meets tol

    Order: double-precision series when it can carry the digits; the
    algebraic expansion (1Psi1, z < 0) or the exponential one (z > 0);
    the extended-precision series.

    Raises:
        PrecisionError: no method met tol; the best result is attached
    """
    tol = _check_tol(tol)
    z = float(z)
    _, n_est, _ = series_plan(spec, z)
    cheap = z == 0.0 or double_feasible(spec, z, tol)
    candidates: List[EvalResult] = []

    if cheap:
        try:
            return wright_series(spec, z, tol)
        except PrecisionError as exc:
            if exc.result is not None:
                candidates.append(exc.result)

    if z < 0 and spec.p == 1 and spec.q == 1:
        (A1, a1), (B1, b1) = spec.upper[0], spec.lower[0]
        try:
            res = wright_algebraic_asymptotic_1psi1(a1, A1, b1, B1, -z, n_terms=10)
            if meets_tolerance(res, tol):
                logger.debug(f"{spec.label()} at z={z}: algebraic expansion")
                return res
            candidates.append(res)
        except (DomainError, PoleError) as exc:
            logger.debug(f"{spec.label()} at z={z}: no algebraic expansion ({exc})")

    if z > 0:
        res = wright_exponential_asymptotic(spec, z)
        if meets_tolerance(res, tol):
            logger.debug(f"{spec.label()} at z={z}: exponential expansion")
            return res
        candidates.append(res)

    if not cheap and n_est <= settings.SERIES_TERM_CAP:
        try:
            return wright_series(spec, z, tol)
        except PrecisionError as exc:
            if exc.result is not None:
                candidates.append(exc.result)

    best = None
    if candidates:
        best = min(candidates, key=lambda r: r.abs_err / max(1.0, abs(r.value)))
    logger.warning(f"{spec.label()} at z={z}: no method met tol={tol}")
    raise PrecisionError(
        f"{spec.label()}: no method achieved tol={tol} at z={z}", result=best
    )
