"""Search space models module."""

from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SearchSpace(BaseModel):
    """Continuous box or discrete candidate table, both inside the unit cube."""

    kind: Literal["continuous", "discrete"] = "continuous"
    lower: np.ndarray
    upper: np.ndarray
    candidates: Optional[np.ndarray] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("lower", "upper", mode="before")
    @classmethod
    def as_vector(cls, value: Any) -> np.ndarray:
        """Coerce bounds to float vectors."""
        return np.atleast_1d(np.asarray(value, dtype=float))

    @field_validator("candidates", mode="before")
    @classmethod
    def as_table(cls, value: Any) -> Optional[np.ndarray]:
        """Coerce the candidate table to a float matrix."""
        if value is None:
            return None
        return np.atleast_2d(np.asarray(value, dtype=float))

    @model_validator(mode="after")
    def check_space(self) -> "SearchSpace":
        """Bounds ordered; discrete tables nonempty and in bounds."""
        if self.lower.shape != self.upper.shape or np.any(self.lower >= self.upper):
            raise ValueError("continuous bounds need lower < upper per dimension")
        if self.kind == "discrete":
            table = self.candidates
            if table is None or len(table) == 0:
                raise ValueError("discrete space needs a nonempty candidate table")
            if table.shape[1] != len(self.lower):
                raise ValueError("candidate rows must match the space dimension")
            if np.any(table < self.lower) or np.any(table > self.upper):
                raise ValueError("candidate rows must lie inside the bounds")
        return self

    @property
    def dimension(self) -> int:
        """Search-space dimension."""
        return len(self.lower)

    @classmethod
    def unit_cube(cls, dimension: int) -> "SearchSpace":
        """Continuous ``[0, 1]^d``."""
        return cls(lower=np.zeros(dimension), upper=np.ones(dimension))

    @classmethod
    def table(cls, candidates: np.ndarray) -> "SearchSpace":
        """Discrete space over rows of the unit cube."""
        dimension = np.atleast_2d(candidates).shape[1]
        return cls(
            kind="discrete",
            lower=np.zeros(dimension),
            upper=np.ones(dimension),
            candidates=candidates,
        )

    def contains(self, point: np.ndarray) -> bool:
        """Whether ``point`` is a member of the space."""
        point = np.asarray(point, dtype=float)
        if self.kind == "discrete":
            return bool(np.any(np.all(self.candidates == point, axis=1)))
        return bool(np.all(point >= self.lower) and np.all(point <= self.upper))


class SearchBudget(BaseModel):
    """Random plus local search budget."""

    n_random: int = Field(default=2000, gt=0)
    n_local_starts: int = Field(default=5, gt=0)
    local_steps: int = Field(default=10, gt=0)
    step_scale: float = Field(default=0.1, gt=0)
