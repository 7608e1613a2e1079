from enum import Enum
from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, Field, model_validator


class Direction(str, Enum):
    """Sign of the exponent in the functional int exp(-+ kappa xi_s) ds."""

    MINUS_KAPPA = "minus_kappa"
    PLUS_KAPPA = "plus_kappa"


class SimConfig(BaseModel):
    """Monte Carlo settings; the same config always reproduces the same draws."""

    eps_jump: float = Field(default=0.05, gt=0.0, le=0.1, description="Small-jump cutoff")
    horizon: float = Field(default=200.0, gt=0.0, description="Path horizon")
    step: float = Field(default=0.01, gt=0.0, description="Skeleton time step")
    n_paths: int = Field(default=10_000, ge=100, description="Number of paths")
    seed: int = Field(default=20240101, ge=0, lt=2**64, description="Root seed")
    gaussian_compensation: bool = Field(
        default=True, description="Replace small jumps by a Gaussian"
    )

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def step_fits_horizon(self):
        if self.step >= self.horizon:
            raise ValueError("step must be smaller than the horizon")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.step))


class SampleSet(BaseModel):
    """I.i.d. draws with their seed and estimator diagnostics."""

    values: List[float] = Field(..., description="Draws ordered by path index")
    seed: int = Field(..., description="Root seed used")
    meta: Dict[str, Any] = Field(..., description="Truncation diagnostics")

    @model_validator(mode="after")
    def meta_present(self):
        if not self.meta:
            raise ValueError("estimator metadata must be recorded")
        n = self.meta.get("n_paths")
        if n is not None and n != len(self.values):
            raise ValueError(f"{len(self.values)} values for n_paths={n}")
        return self

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


class PathSample(BaseModel):
    """Path skeletons on a common time grid, one row per path."""

    times: Any = Field(..., description="Grid, shape (n_steps + 1,)")
    values: Any = Field(..., description="Positions, shape (n_paths, n_steps + 1)")
    seed: int
    meta: Dict[str, Any] = Field(default_factory=dict)

    model_config = {"arbitrary_types_allowed": True}

    @model_validator(mode="after")
    def shapes(self):
        times = np.asarray(self.times)
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[1] != times.shape[0]:
            raise ValueError(
                f"values shape {values.shape} does not match grid {times.shape}"
            )
        return self
