"""Controller and schedule models module."""

from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

AttitudeMode = Literal["last", "inc_change", "last_adjust"]
AttitudeExploitTerm = Literal["pi", "wei_term"]
ScheduleKind = Literal[
    "sawei", "static", "steps", "switch_ei_pi", "pulse", "portfolio", "ei", "pi", "lcb"
]

PULSE_CYCLE = [0.1, 0.3, 0.5, 0.7, 0.9]


class ControllerSettings(BaseModel):
    """SAWEI controller overrides of a run."""

    initial_alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    epsilon: float = Field(default=0.1, gt=0.0, le=1.0)
    delta_alpha: float = Field(default=0.1, gt=0.0, lt=1.0)
    horizon: int = Field(default=1, gt=0)
    window: int = Field(default=7, gt=0)
    attitude_mode: AttitudeMode = "last"
    attitude_exploit_term: AttitudeExploitTerm = "pi"
    adjust_enabled: bool = True


class ControllerState(BaseModel):
    """Mutable state of one SAWEI controller, owned by exactly one run."""

    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    ubr_raw: list[float] = Field(default_factory=list)
    ubr_smoothed: list[float] = Field(default_factory=list)
    max_abs_gradient: float = 0.0
    last_gradient: float = float("nan")
    attitude_mode: AttitudeMode = "last"
    attitude_exploit_term: AttitudeExploitTerm = "pi"
    explore_acc: float = 0.0
    exploit_acc: float = 0.0
    epsilon: float = Field(default=0.1, gt=0.0, le=1.0)
    delta_alpha: float = Field(default=0.1, gt=0.0, lt=1.0)
    horizon: int = Field(default=1, gt=0)
    window: int = Field(default=7, gt=0)
    adjust_enabled: bool = True

    model_config = {"validate_assignment": True}

    @classmethod
    def from_settings(cls, settings: ControllerSettings) -> "ControllerState":
        """Fresh state from run overrides."""
        return cls(
            alpha=settings.initial_alpha,
            attitude_mode=settings.attitude_mode,
            attitude_exploit_term=settings.attitude_exploit_term,
            epsilon=settings.epsilon,
            delta_alpha=settings.delta_alpha,
            horizon=settings.horizon,
            window=settings.window,
            adjust_enabled=settings.adjust_enabled,
        )


class AttitudeRecord(BaseModel):
    """WEI summands at the proposed point, from the proposing posterior."""

    a_explore: float = Field(ge=0.0)
    a_exploit: float


class ControllerStep(BaseModel):
    """Per-iteration controller telemetry."""

    ubr_raw: float
    ubr_smoothed: float
    gradient: float
    max_abs_gradient: float
    converged: bool
    adjusted: bool
    alpha: float


class SchedulePolicy(BaseModel):
    """How the acquisition function is chosen per BO iteration."""

    kind: ScheduleKind
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    alpha_from: float = Field(default=0.5, ge=0.0, le=1.0)
    alpha_to: float = Field(default=1.0, ge=0.0, le=1.0)
    n_steps: int = Field(default=5, ge=1)
    fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    cycle: list[float] = Field(default_factory=lambda: list(PULSE_CYCLE))
    name: str = ""

    @field_validator("cycle")
    @classmethod
    def check_cycle(cls, value: list[float]) -> list[float]:
        """Pulse cycle values are WEI weights."""
        if not value or any(not 0.0 <= a <= 1.0 for a in value):
            raise ValueError("cycle needs at least one alpha in [0, 1]")
        return value

    @model_validator(mode="after")
    def default_name(self) -> "SchedulePolicy":
        """Fill in the display label."""
        if not self.name:
            self.name = self._default_label()
        return self

    def _default_label(self) -> str:
        labels = {
            "sawei": "SAWEI",
            "static": f"WEI({self.alpha:g})",
            "steps": f"Steps({self.alpha_from:g}->{self.alpha_to:g})",
            "switch_ei_pi": f"EI->PI({round(self.fraction * 100):d}%)",
            "pulse": "Pulse",
            "portfolio": "Portfolio",
            "ei": "EI",
            "pi": "PI",
            "lcb": "LCB",
        }
        return labels[self.kind]

    @property
    def slug(self) -> str:
        """File-system safe label."""
        keep = [c if c.isalnum() or c in "._" else "-" for c in self.name]
        return "".join(keep).strip("-")
