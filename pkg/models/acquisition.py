"""Acquisition models module."""

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

AcquisitionVariant = Literal["wei", "ei", "pi", "lcb", "portfolio"]


class AcquisitionSpec(BaseModel):
    """Which utility the acquisition optimizer maximizes.

    ``lcb`` scores ``-(mean - coefficient * std)``, the optimistic bound under
    minimization; with ``coefficient=None`` the iteration's beta_t is used.
    """

    variant: AcquisitionVariant
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    xi: float = Field(default=0.0, ge=0.0)
    coefficient: Optional[float] = Field(default=None, ge=0.0)
    arms: list["AcquisitionSpec"] = Field(default_factory=list)
    eta: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def check_portfolio(self) -> "AcquisitionSpec":
        """A portfolio needs at least two arms."""
        if self.variant == "portfolio" and len(self.arms) < 2:
            raise ValueError("portfolio needs at least two arms")
        return self

    @property
    def label(self) -> str:
        """Short display name."""
        if self.variant == "wei":
            return f"WEI({self.alpha:g})"
        if self.variant in ("ei", "pi"):
            name = self.variant.upper()
            return f"{name}(xi={self.xi:g})" if self.xi else name
        if self.variant == "lcb":
            coef = "beta_t" if self.coefficient is None else f"{self.coefficient:g}"
            return f"LCB({coef})"
        return "Portfolio"


class ConfidenceCoefficient(BaseModel):
    """Inputs of the UCB/LCB coefficient beta_t."""

    d: int = Field(gt=0)
    t: int = Field(gt=0)
    beta: float = Field(default=1.0, gt=0.0)


class HedgeState(BaseModel):
    """Cumulative gains of the GP-Hedge portfolio."""

    arms: list[AcquisitionSpec]
    gains: list[float]
    eta: float = Field(default=1.0, gt=0.0)

    @field_validator("gains")
    @classmethod
    def check_finite(cls, value: list[float]) -> list[float]:
        """Gains must be finite."""
        if not all(math.isfinite(g) for g in value):
            raise ValueError("gains must be finite")
        return value

    @model_validator(mode="after")
    def check_arms(self) -> "HedgeState":
        """One gain per arm, at least two arms."""
        if len(self.arms) < 2 or len(self.arms) != len(self.gains):
            raise ValueError("need >= 2 arms and one gain per arm")
        return self
