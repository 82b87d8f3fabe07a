"""Gaussian-process surrogate models module."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

JITTER_FLOOR = 1e-10
JITTER_MAX = 1e-4


class Dataset(BaseModel):
    """Observed points in the unit cube with their objective values."""

    points: np.ndarray = Field(default=..., description="(n, d) points in [0, 1]^d")
    values: np.ndarray = Field(default=..., description="(n,) objective values")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("points", mode="before")
    @classmethod
    def as_matrix(cls, value: Any) -> np.ndarray:
        """Coerce points to a float matrix."""
        points = np.atleast_2d(np.asarray(value, dtype=float))
        if np.any(points < 0.0) or np.any(points > 1.0):
            raise ValueError("every coordinate must lie in [0, 1]")
        return points

    @field_validator("values", mode="before")
    @classmethod
    def as_vector(cls, value: Any) -> np.ndarray:
        """Coerce values to a finite float vector."""
        values = np.atleast_1d(np.asarray(value, dtype=float)).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        return values

    @model_validator(mode="after")
    def check_lengths(self) -> "Dataset":
        """Points and values must pair up and be nonempty."""
        if len(self.values) < 1 or len(self.points) != len(self.values):
            raise ValueError("points and values need equal length >= 1")
        return self

    @property
    def dimension(self) -> int:
        """Search-space dimension."""
        return int(self.points.shape[1])


class GpConfig(BaseModel):
    """Gaussian-process configuration."""

    noise_variance: float = Field(default=JITTER_FLOOR, ge=JITTER_FLOOR)
    fit_restarts: int = Field(default=5, gt=0)
    lengthscale_bounds: tuple[float, float] = (1e-3, 10.0)
    variance_bounds: tuple[float, float] = (1e-3, 1e3)

    @field_validator("lengthscale_bounds", "variance_bounds")
    @classmethod
    def check_bounds(cls, value: tuple[float, float]) -> tuple[float, float]:
        """Bounds must be nonempty with a positive lower end."""
        lower, upper = value
        if lower <= 0 or upper < lower:
            raise ValueError("bounds need 0 < lower <= upper")
        return value


class GpHyperparameters(BaseModel):
    """Matern-5/2 ARD kernel hyperparameters."""

    lengthscales: tuple[float, ...]
    signal_variance: float = Field(gt=0)

    def to_log_vector(self) -> np.ndarray:
        """Hyperparameters as ``[log l_1, ..., log l_d, log s2]``."""
        return np.log(np.append(self.lengthscales, self.signal_variance))

    @classmethod
    def from_log_vector(cls, theta: np.ndarray) -> "GpHyperparameters":
        """Inverse of :meth:`to_log_vector`."""
        values = np.exp(np.asarray(theta, dtype=float))
        return cls(
            lengthscales=tuple(float(v) for v in values[:-1]),
            signal_variance=float(values[-1]),
        )


class PosteriorModel(BaseModel):
    """Fitted GP: hyperparameters, Cholesky factor and cached solve."""

    hyperparameters: GpHyperparameters
    noise_variance: float
    points: np.ndarray
    cholesky: np.ndarray
    alpha: np.ndarray
    y_mean: float
    y_std: float
    log_marginal_likelihood: float

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
