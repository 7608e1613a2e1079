import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator
from scipy import special


def stable_constant(alpha: float) -> float:
    """c = -1 / (alpha cos(alpha pi / 2)), positive for 1 < alpha <= 2"""
    return -1.0 / (alpha * math.cos(alpha * math.pi / 2.0))


def immigration_exponent(kappa: float, delta: float) -> float:
    """
    Exponent D = alpha delta / kappa of the entrance-law transform

    Every place that needs the reparametrized immigration rate goes through
    this function; the user-facing delta is never rescaled elsewhere.
    """
    return (kappa + 1.0) * delta / kappa


class Family(str, Enum):
    GAMMA = "gamma"
    DELTA = "delta"


class FamilyParams(BaseModel):
    """Parameters of psi^(gamma) (give ``gamma``) or psi^(0,delta) (give ``delta``)."""

    alpha: float = Field(..., gt=1.0, lt=2.0, description="Stability index")
    gamma: Optional[float] = Field(default=None, description="Esscher parameter")
    delta: Optional[float] = Field(default=None, ge=0.0, description="Immigration rate")

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def one_family(self):
        if (self.gamma is None) == (self.delta is None):
            raise ValueError("exactly one of gamma or delta must be given")
        if self.gamma is not None:
            if not math.isfinite(self.gamma):
                raise ValueError("gamma must be finite")
            if self.gamma <= -self.alpha:
                raise ValueError(
                    f"gamma={self.gamma} outside K: need gamma > -alpha={-self.alpha}"
                )
        if not (self.c > 0 and self.c_alpha > 0):
            raise ValueError("c and c_alpha must be positive")
        return self

    @property
    def family(self) -> Family:
        return Family.GAMMA if self.gamma is not None else Family.DELTA

    @property
    def c(self) -> float:
        return stable_constant(self.alpha)

    @property
    def c_alpha(self) -> float:
        return self.c / float(special.gamma(-self.alpha))

    @property
    def kappa(self) -> float:
        return self.alpha - 1.0

    @property
    def delta_kappa(self) -> float:
        return self._delta() / self.kappa

    @property
    def a(self) -> float:
        """alpha * delta_kappa, the exponent of the density tail"""
        return self.alpha * self.delta_kappa

    @property
    def M_delta(self) -> float:
        """Mean E^(0,delta)[xi_1] = c Gamma(alpha) (1 - alpha delta / kappa)"""
        return self.c * math.gamma(self.alpha) * (1.0 - self.a)

    @property
    def m_kappa(self) -> float:
        return 2.0 - self.a

    @property
    def negative_mean(self) -> bool:
        return self.family is Family.DELTA and self._delta() > self.kappa / self.alpha

    def _delta(self) -> float:
        if self.delta is None:
            raise ValueError("delta-family quantity requested for a gamma-family set")
        return self.delta

    def label(self) -> str:
        if self.family is Family.GAMMA:
            return f"alpha={self.alpha:g}, gamma={self.gamma:g}"
        return f"alpha={self.alpha:g}, delta={self.delta:g}"


class CbiParams(BaseModel):
    """Self-similar CBI with branching (c/kappa) l^(kappa+1) and immigration
    delta c ((kappa+1)/kappa) l^kappa; ``eta`` is the OU drift."""

    kappa: float = Field(..., gt=0.0, le=1.0, description="Self-similarity index")
    c: Optional[float] = Field(default=None, gt=0.0, description="Branching scale")
    delta: float = Field(default=0.0, ge=0.0, description="Immigration rate")
    eta: float = Field(default=0.0, description="Ornstein-Uhlenbeck drift")

    model_config = {"frozen": True}

    @model_validator(mode="before")
    @classmethod
    def default_scale(cls, data):
        if not isinstance(data, dict) or data.get("c") is not None:
            return data
        kappa = data.get("kappa")
        if isinstance(kappa, (int, float)) and 0 < kappa <= 1:
            data = {**data, "c": stable_constant(float(data["kappa"]) + 1.0)}
        return data

    @classmethod
    def from_family(cls, params: FamilyParams, eta: float = 0.0) -> "CbiParams":
        return cls(kappa=params.kappa, c=params.c, delta=params.delta, eta=eta)

    @property
    def alpha(self) -> float:
        return self.kappa + 1.0

    @property
    def D(self) -> float:
        return immigration_exponent(self.kappa, self.delta)

    def branching(self, lam: float) -> float:
        return self.c / self.kappa * lam ** (self.kappa + 1.0)

    def immigration(self, lam: float) -> float:
        return self.delta * self.c * self.alpha / self.kappa * lam**self.kappa
