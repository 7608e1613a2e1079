import math
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from wrightlevy.app.core.config import settings


class Method(str, Enum):
    """Evaluation method recorded on every result."""

    SERIES = "series"
    ASYMPTOTIC_EXPONENTIAL = "asymptotic_exponential"
    ASYMPTOTIC_ALGEBRAIC = "asymptotic_algebraic"
    QUADRATURE = "quadrature"


class WrightSpec(BaseModel):
    """Coefficients of a Wright hypergeometric function pPsiq.

    ``upper`` holds the (A_i, a_i) pairs of the numerator gammas
    Gamma(A_i n + a_i), ``lower`` the (B_j, b_j) pairs of the denominator.
    Only the entire case S > 0 is accepted.
    """

    upper: Tuple[Tuple[float, float], ...] = Field(
        default=(), description="Numerator pairs (A_i, a_i)"
    )
    lower: Tuple[Tuple[float, float], ...] = Field(
        default=(), description="Denominator pairs (B_j, b_j)"
    )

    model_config = {"frozen": True}

    @field_validator("upper", "lower")
    @classmethod
    def positive_scales(cls, pairs):
        for scale, shift in pairs:
            if not (math.isfinite(scale) and math.isfinite(shift)):
                raise ValueError("coefficients must be finite")
            if scale <= 0:
                raise ValueError(f"scale {scale} must be positive")
        return pairs

    @model_validator(mode="after")
    def entire_and_pole_free(self):
        if self.S <= 0:
            raise ValueError(f"S = {self.S} <= 0: only the entire case is supported")
        horizon = np.arange(settings.SERIES_TERM_CAP + 1, dtype=float)
        for scale, shift in self.upper:
            args = scale * horizon + shift
            hits = (args <= 0) & (np.abs(args - np.round(args)) < 1e-12)
            if hits.any():
                n = int(horizon[hits][0])
                raise ValueError(
                    f"upper gamma Gamma({scale}*n + {shift}) hits a pole at n={n}"
                )
        return self

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @property
    def S(self) -> float:
        return 1.0 + sum(b for b, _ in self.lower) - sum(a for a, _ in self.upper)

    @property
    def T(self) -> float:
        log_t = sum(a * math.log(a) for a, _ in self.upper) - sum(
            b * math.log(b) for b, _ in self.lower
        )
        return math.exp(log_t)

    @property
    def G(self) -> float:
        return (
            sum(b for _, b in self.lower)
            - sum(a for _, a in self.upper)
            + 0.5 * (self.p - self.q)
            + 1.0
        )

    @property
    def H0(self) -> float:
        S, G = self.S, self.G
        log_h = 0.5 * (self.p - self.q) * math.log(2.0 * math.pi)
        log_h += (G - 0.5) * math.log(S)
        log_h += sum((a - 0.5) * math.log(A) for A, a in self.upper)
        log_h += sum((0.5 - b) * math.log(B) for B, b in self.lower)
        return math.exp(log_h)

    def derivative_spec(self) -> "WrightSpec":
        """Spec of d/dz pPsiq: a_i -> a_i + A_i and b_j -> b_j + B_j."""
        return WrightSpec(
            upper=tuple((A, a + A) for A, a in self.upper),
            lower=tuple((B, b + B) for B, b in self.lower),
        )

    def label(self) -> str:
        up = "".join(f"({A:g},{a:g})" for A, a in self.upper) or "-"
        lo = "".join(f"({B:g},{b:g})" for B, b in self.lower) or "-"
        return f"{self.p}Psi{self.q}[{up};{lo}]"


class EvalResult(BaseModel):
    """A value with an absolute-error estimate and provenance."""

    value: float = Field(..., description="Computed value")
    abs_err: float = Field(..., ge=0.0, description="Absolute error estimate")
    method: Method = Field(..., description="Evaluation method")
    terms: int = Field(..., ge=1, description="Series terms or quadrature nodes")
    log_scale: float = Field(
        default=0.0,
        description="Natural-log scale factor: the true value is value * exp(log_scale)",
    )

    @field_validator("abs_err")
    @classmethod
    def finite_error(cls, v):
        if not math.isfinite(v):
            raise ValueError("abs_err must be finite")
        return v

    def envelope(self) -> dict:
        """JSON envelope used by the CLI."""
        return {
            "value": self.value,
            "abs_err": self.abs_err,
            "method": self.method.value,
            "terms": self.terms,
            **({"log_scale": self.log_scale} if self.log_scale else {}),
        }
