"""
Self-similar continuous-state branching processes with immigration

Branching mechanism (c/kappa) l^(kappa+1), immigration delta c (alpha/kappa) l^kappa.
With s = c t and D = alpha delta / kappa:

    Lambda_t(l, x) = (1 + s l^kappa)^(-D) exp(-x theta_l(t))
    p_t(x, y) = y^(kappa D - 1) s^(-D) sum_n (-x)^n s^(-n/kappa) / (n! Gamma(D + n/kappa))
                * 1Psi1((1, D + n/kappa); (kappa, kappa D) | -y^kappa / s)
"""
import math
import warnings
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, special

from wrightlevy.app.core.config import settings
from wrightlevy.app.core.exceptions import (
    ConsistencyError,
    DomainError,
    PrecisionError,
    QuadratureError,
    SeriesPoleError,
)
from wrightlevy.app.core.logging import get_logger
from wrightlevy.app.schemas.params import CbiParams
from wrightlevy.app.schemas.wright import EvalResult, WrightSpec
from wrightlevy.app.services.caching import memoized
from wrightlevy.app.services.specfun import bessel_i
from wrightlevy.app.services.wright import wright_eval

logger = get_logger("wrightlevy.app.services.cbi")


class BoundaryBehaviour(str, Enum):
    """Behaviour of the process at 0. ABSORBED (hit and stopped without being a
    trap of the immigration-free process) does not occur in this family."""

    UNATTAINABLE = "unattainable"
    RECURRENT_REFLECTING = "recurrent_reflecting"
    ABSORBED = "absorbed"
    TRAP = "trap"


def theta_flow(p: CbiParams, lam: float, t: float) -> float:
    """theta_l(t) = l (1 + c t l^kappa)^(-1/kappa), solving theta' = -(c/kappa) theta^(kappa+1)"""
    if lam < 0 or t < 0:
        raise DomainError(f"theta_flow needs lam, t >= 0, got {lam}, {t}")
    if lam == 0:
        return 0.0
    return lam * (1.0 + p.c * t * lam**p.kappa) ** (-1.0 / p.kappa)


def immigration_integral(p: CbiParams, lam: float, t: float) -> float:
    """int_0^t chi(theta_l(s)) ds = D log(1 + c t l^kappa)"""
    if lam < 0 or t < 0:
        raise DomainError(f"immigration_integral needs lam, t >= 0, got {lam}, {t}")
    return p.D * math.log1p(p.c * t * lam**p.kappa)


def laplace_semigroup(p: CbiParams, t: float, lam: float, x: float) -> float:
    """Lambda_t(l, x) = E_x[exp(-l X_t)] = (1 + c t l^kappa)^(-D) exp(-x theta_l(t))"""
    if min(t, lam, x) < 0:
        raise DomainError(f"laplace_semigroup needs nonnegative arguments, got {t}, {lam}, {x}")
    if lam == 0:
        return 1.0
    return math.exp(-immigration_integral(p, lam, t) - x * theta_flow(p, lam, t))


@memoized
def _inner(kappa: float, D: float, n: int, w: float, tol: float) -> EvalResult:
    """1Psi1((1, D + n/kappa); (kappa, kappa D) | -w)"""
    spec = WrightSpec(upper=((1.0, D + n / kappa),), lower=((kappa, kappa * D),))
    return wright_eval(spec, -w, tol)


def entrance_density(p: CbiParams, t: float, y: float, tol: Optional[float] = None) -> float:
    """
    p_t(0, y) = s^(-D) y^(kappa D - 1) / Gamma(D) 1Psi1((1, D); (kappa, kappa D) | -y^kappa / s)

    Raises:
        DomainError: t, y or delta not positive
        PrecisionError: propagated from the Wright evaluation
    """
    if not (t > 0 and y > 0 and p.delta > 0):
        raise DomainError(f"entrance density needs t, y, delta > 0, got {t}, {y}, {p.delta}")
    tol = tol if tol is not None else 1e-10
    s = p.c * t
    D = p.D
    inner = _inner(p.kappa, D, 0, y**p.kappa / s, tol)
    log_pref = -D * math.log(s) + (p.kappa * D - 1.0) * math.log(y) - math.lgamma(D)
    return max(math.exp(log_pref) * inner.value, 0.0)


def transition_density(
    p: CbiParams,
    t: float,
    x: float,
    y: float,
    tol: Optional[float] = None,
    n_cap: int = 500,
) -> float:
    """
    Transition density p_t(x, y) by the double Wright series

    The outer sum stops after three consecutive terms below tol * |partial sum|
    with decreasing magnitude. Inner 1Psi1 values are memoized across calls.

    Raises:
        DomainError: t, y, delta not positive or x negative
        PrecisionError: n_cap outer terms without convergence
        ConsistencyError: value below -tol relative to the term sizes
    """
    if not (t > 0 and y > 0 and p.delta > 0 and x >= 0):
        raise DomainError(f"transition density needs t, y, delta > 0 and x >= 0, got {t}, {x}, {y}")
    tol = tol if tol is not None else 1e-10
    if x == 0:
        return entrance_density(p, t, y, tol)
    kappa, D = p.kappa, p.D
    s = p.c * t
    w = y**kappa / s
    log_pref = (kappa * D - 1.0) * math.log(y) - D * math.log(s)
    log_ratio = math.log(x) - math.log(s) / kappa

    total = 0.0
    abs_total = 0.0
    last_abs, run = math.inf, 0
    for n in range(n_cap + 1):
        inner = _inner(kappa, D, n, w, tol)
        log_coef = n * log_ratio - math.lgamma(n + 1.0) - special.gammaln(D + n / kappa)
        term = (-1.0) ** n * math.exp(log_pref + log_coef) * inner.value
        total += term
        t_abs = abs(term)
        abs_total += t_abs
        small = t_abs == 0.0 or t_abs < tol * abs(total)
        run = run + 1 if (small and t_abs <= last_abs) else 0
        last_abs = t_abs
        if run >= 3:
            break
    else:
        raise PrecisionError(f"transition density: {n_cap} outer terms at t={t}, x={x}, y={y}")

    if total < 0:
        if total < -tol * max(abs_total, 1.0):
            raise ConsistencyError(f"negative transition density {total:.3e} at t={t}, x={x}, y={y}")
        return 0.0
    return total


def bessel_transition_density(p: CbiParams, t: float, x: float, y: float) -> float:
    """
    kappa = 1 closed form (squared Bessel type):
    (1/s) exp(-(x + y)/s) (y/x)^((D-1)/2) I_(D-1)(2 sqrt(x y)/s),  s = c t
    """
    if abs(p.kappa - 1.0) > 1e-12:
        raise DomainError("closed Bessel form holds at kappa = 1 only")
    if not (t > 0 and x > 0 and y > 0):
        raise DomainError("t, x and y must be positive")
    s = p.c * t
    nu = p.D - 1.0
    arg = 2.0 * math.sqrt(x * y) / s
    # exponentially scaled Bessel keeps large arguments finite
    scaled = special.ive(nu, arg) if arg > 50 else bessel_i(nu, arg) * math.exp(-arg)
    log_value = -math.log(s) - (x + y) / s + 0.5 * nu * math.log(y / x) + arg
    return math.exp(log_value) * scaled


def _h_integral(kappa: float, z: float) -> float:
    """H(z) = int_0^inf exp(-r - z r^(-1/kappa)) dr, H(0) = 1"""
    if z == 0:
        return 1.0
    log_z = math.log(z)

    def integrand(r: float) -> float:
        if r <= 0:
            return 0.0
        exponent = log_z - math.log(r) / kappa
        if exponent > 700.0:
            return 0.0
        return math.exp(-r - math.exp(exponent))

    # integrand peaks where r^(1 + 1/kappa) = z / kappa
    peak = (z / kappa) ** (kappa / (kappa + 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        pieces = [0.0, min(peak, 1.0), max(peak, 1.0), math.inf]
        total, err = 0.0, 0.0
        for lo, hi in zip(pieces[:-1], pieces[1:]):
            if hi <= lo:
                continue
            value, e = integrate.quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=200)
            total += value
            err += e
    if err > 1e-10 * max(total, 1e-300):
        raise QuadratureError(f"H integral at z={z}: error {err:.2e}")
    return total


def ihat(kappa: float, x: float) -> float:
    """
    I^(x) = x int_0^inf exp(-t - x t^(-1/kappa)) t^(-1/kappa - 1) dt, by quadrature

    Evaluated as kappa int_0^inf exp(-r - x r^(-1/kappa)) dr after an
    integration by parts; at x = 0 the right limit kappa is returned.
    """
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa={kappa} outside (0, 1]")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    return kappa * _h_integral(kappa, x)


def ihat_series(kappa: float, x: float, max_terms: int = 400) -> float:
    """
    Residue series of I^:

        kappa [sum_n (-1)^n Gamma(1 - n/kappa) x^n / n!
               + kappa sum_m (-1)^m Gamma(-kappa (m+1)) x^(kappa (m+1)) / m!]

    Raises:
        SeriesPoleError: some n/kappa within 0.05 of a positive integer
        PrecisionError: the terms cancel beyond 1e6 of the sum or do not converge
    """
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa={kappa} outside (0, 1]")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x == 0:
        return kappa

    total, largest = 0.0, 0.0
    converged = [False, False]
    runs = [0, 0]
    for n in range(max_terms):
        for branch in (0, 1):
            if converged[branch]:
                continue
            if branch == 0:
                arg = 1.0 - n / kappa
                power = n * math.log(x)
                scale = 1.0
            else:
                arg = -kappa * (n + 1)
                power = kappa * (n + 1) * math.log(x)
                scale = kappa
            if arg <= 0 and abs(arg - round(arg)) < 0.05:
                raise SeriesPoleError(f"gamma pole near {arg:.3f} in the series at kappa={kappa}")
            term = (
                scale
                * (-1.0) ** n
                * special.gammasgn(arg)
                * math.exp(special.gammaln(arg) + power - math.lgamma(n + 1.0))
            )
            total += term
            largest = max(largest, abs(term))
            runs[branch] = runs[branch] + 1 if abs(term) < 1e-16 * max(abs(total), 1e-300) else 0
            if runs[branch] >= 3:
                converged[branch] = True
        if all(converged):
            break
    else:
        raise PrecisionError(f"ihat series at x={x} did not converge in {max_terms} terms")
    if largest > 1e6 * abs(total):
        raise PrecisionError(f"ihat series at x={x} cancels by {largest / abs(total):.1e}")
    return kappa * total


def first_passage_laplace(p: CbiParams, q: float, x: float, a: float) -> float:
    """
    E_x[exp(-q T_a)] for the immigration-free process, x > a > 0:
    I^(x (q/c)^(1/kappa)) / I^(a (q/c)^(1/kappa))
    """
    if not x > a > 0:
        raise DomainError(f"first passage needs x > a > 0, got x={x}, a={a}")
    if q < 0:
        raise DomainError(f"q must be nonnegative, got {q}")
    if q == 0:
        return 1.0
    scale = (q / p.c) ** (1.0 / p.kappa)
    return ihat(p.kappa, x * scale) / ihat(p.kappa, a * scale)


def absorption_laplace(p: CbiParams, q: float, x: float) -> float:
    """E_x[exp(-q T_0)] = I^(x (q/c)^(1/kappa)) / kappa"""
    if q < 0 or x < 0:
        raise DomainError("q and x must be nonnegative")
    return ihat(p.kappa, x * (q / p.c) ** (1.0 / p.kappa)) / p.kappa


def absorption_cdf(p: CbiParams, x: float, t: float) -> float:
    """P_x(T_0 <= t) = exp(-x (c t)^(-1/kappa))"""
    if t <= 0:
        return 0.0
    return math.exp(-x * (p.c * t) ** (-1.0 / p.kappa))


def boundary_classification(p: CbiParams) -> BoundaryBehaviour:
    """0 is unattainable for delta >= kappa/alpha, recurrent and reflecting below, a trap at delta = 0"""
    if p.delta == 0:
        return BoundaryBehaviour.TRAP
    if p.delta >= p.kappa / p.alpha - 1e-12:
        return BoundaryBehaviour.UNATTAINABLE
    return BoundaryBehaviour.RECURRENT_REFLECTING


def _tau(eta: float, kappa: float, t: float) -> float:
    """tau_eta(t) = (1 - exp(-eta kappa t)) / (eta kappa), tau_0(t) = t"""
    if eta == 0:
        return t
    return -math.expm1(-eta * kappa * t) / (eta * kappa)


class OUTransform(NamedTuple):
    tau: Callable[[float], float]
    laplace: Callable[[float, float, float], float]
    density: Callable[[float, float, float], float]


def ou_transform(p: CbiParams) -> OUTransform:
    """
    Self-similar Ornstein-Uhlenbeck process U_t = exp(-eta t) X_(tau_(-eta)(t))

    Returns:
        (tau_eta, (t, l, x) -> E_x[exp(-l U_t)], (t, x, y) -> density of U_t)
    """
    eta, kappa = p.eta, p.kappa

    def tau(t: float) -> float:
        return _tau(eta, kappa, t)

    def clock(t: float) -> float:
        return _tau(-eta, kappa, t)

    def laplace(t: float, lam: float, x: float) -> float:
        if t == 0:
            return math.exp(-lam * x)
        return laplace_semigroup(p, clock(t), lam * math.exp(-eta * t), x)

    def density(t: float, x: float, y: float) -> float:
        scale = math.exp(eta * t)
        return scale * transition_density(p, clock(t), x, scale * y)

    return OUTransform(tau=tau, laplace=laplace, density=density)


def entrance_sample(p: CbiParams, t: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draws from the entrance law at time t: (c t)^(1/kappa) G^(1/kappa) S_kappa with
    G ~ Gamma(D) and S_kappa positive stable, E exp(-l S_kappa) = exp(-l^kappa)
    """
    from wrightlevy.app.services.sim import positive_stable

    if not (t > 0 and p.delta > 0):
        raise DomainError("entrance law needs t > 0 and delta > 0")
    g = rng.gamma(shape=p.D, size=n)
    stable = positive_stable(p.kappa, n, rng)
    return (p.c * t) ** (1.0 / p.kappa) * g ** (1.0 / p.kappa) * stable


def total_mass(density: Callable[[float], float], tail_index: float, y_scale: float = 1.0) -> float:
    """
    int_0^inf density(y) dy for a density decaying like y^(-tail_index - 1)

    Beyond 10 y_scale the substitution z = 1/y leaves z^(tail_index - 1) times a
    bounded factor, integrated with the algebraic weight.
    """
    if not 0 < tail_index <= 1:
        raise DomainError(f"tail_index={tail_index} outside (0, 1]")
    nodes = [0.0, 0.01 * y_scale, 0.1 * y_scale, y_scale, 10.0 * y_scale]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(nodes[:-1], nodes[1:]):
            v, _ = integrate.quad(density, lo, hi, epsabs=1e-13, epsrel=1e-10, limit=200)
            total += v

        def regular(z: float) -> float:
            return density(1.0 / z) * z ** (-1.0 - tail_index) if z > 0 else 0.0

        tail, _ = integrate.quad(
            regular, 0.0, 1.0 / nodes[-1], weight="alg", wvar=(tail_index - 1.0, 0.0), epsabs=1e-13, limit=200
        )
    return total + tail


def laplace_of_density(
    density: Callable[[float], float], lam: float, y_scale: float = 1.0
) -> float:
    """
    int_0^inf e^(-l y) density(y) dy, truncated where the integrand is below
    1e-14 of its peak on a log grid
    """
    grid = y_scale * np.logspace(-8, 4, 121)
    values = np.array([math.exp(-lam * y) * density(y) for y in grid])
    peak = float(values.max())
    cut = grid[-1]
    above = np.nonzero(values > 1e-14 * peak)[0]
    if above.size:
        cut = grid[min(above[-1] + 1, grid.size - 1)]
    nodes = [0.0, *[g for g in (0.01 * y_scale, 0.1 * y_scale, y_scale, 10 * y_scale) if g < cut], cut]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(nodes[:-1], nodes[1:]):
            v, _ = integrate.quad(lambda y: math.exp(-lam * y) * density(y), lo, hi, epsabs=1e-13, epsrel=1e-10, limit=200)
            total += v
    return total
