import math
import warnings
from enum import Enum
from typing import Callable

from pydantic import BaseModel, Field, model_validator
from scipy import integrate


class Compensation(str, Enum):
    """Small-jump compensation in the Levy-Khintchine exponent."""

    TRUNCATED = "truncated"  # lambda y 1{|y| < 1}
    FULL = "full"  # lambda y


class LongTimeBehaviour(str, Enum):
    DRIFTS_TO_PLUS_INF = "drifts_to_plus_inf"
    OSCILLATES = "oscillates"
    DRIFTS_TO_MINUS_INF = "drifts_to_minus_inf"


class LevyTriplet(BaseModel):
    """Characteristic triplet of a spectrally negative Levy process.

    ``levy_density`` maps y < 0 (scalar or numpy array) to the density of
    the Levy measure. ``mean`` is E[xi_1], needed to move between the two
    compensation conventions.
    """

    drift: float = Field(..., description="Drift in the stated compensation convention")
    diffusion: float = Field(default=0.0, ge=0.0, description="Gaussian variance")
    levy_density: Callable = Field(..., description="Density of nu on (-inf, 0)")
    compensation: Compensation = Field(default=Compensation.TRUNCATED)
    mean: float = Field(..., description="E[xi_1]")

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @model_validator(mode="after")
    def integrable_measure(self):
        if not all(math.isfinite(v) for v in (self.drift, self.diffusion, self.mean)):
            raise ValueError("triplet constants must be finite")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            small, _ = integrate.quad(
                lambda y: y * y * self.levy_density(y), -1.0, 0.0, limit=200
            )
            large, _ = integrate.quad(self.levy_density, -math.inf, -1.0, limit=200)
        if not (math.isfinite(small) and math.isfinite(large)):
            raise ValueError("Levy measure does not integrate min(1, y^2)")
        return self
