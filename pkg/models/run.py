"""Run models module."""

import math
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from models.controller import ControllerSettings, SchedulePolicy
from models.search import SearchBudget
from models.surrogate import Dataset, GpConfig

TRACE_COLUMNS = [
    "iteration",
    "phase",
    "y",
    "incumbent",
    "regret",
    "log10_regret",
    "ubr_raw",
    "ubr_smoothed",
    "alpha",
    "a_explore",
    "a_exploit",
    "adjusted",
]

REGRET_FLOOR = 1e-12
ZERO_REGRET_SENTINEL = -10000.0


class InitDesign(BaseModel):
    """Initial design settings."""

    kind: Literal["sobol", "lhs", "uniform"] = "sobol"
    size: int = Field(default=24, ge=2)


class RunConfig(BaseModel):
    """Configuration of a single BO run."""

    objective_id: str
    dimension: int = Field(gt=0)
    init_design: InitDesign = Field(default_factory=InitDesign)
    bo_budget: int = Field(default=256, ge=1)
    schedule: SchedulePolicy = Field(
        default_factory=lambda: SchedulePolicy(kind="sawei")
    )
    controller: ControllerSettings = Field(default_factory=ControllerSettings)
    gp: GpConfig = Field(default_factory=GpConfig)
    search: SearchBudget = Field(default_factory=SearchBudget)
    beta: float = Field(default=1.0, gt=0.0)
    seed: int = Field(default=0, ge=0)


class ObservationHistory(BaseModel):
    """Evaluated points with values and the incumbent."""

    points: list[list[float]] = Field(default_factory=list)
    values: list[float] = Field(default_factory=list)
    incumbent_index: int = -1
    f_min: float = math.inf

    def __len__(self) -> int:
        return len(self.values)

    def add(self, point: np.ndarray, value: float) -> bool:
        """
        Append an observation and update the incumbent.

        :param point: evaluated point in the unit cube
        :param value: observed objective value
        :return: whether the incumbent changed
        """
        self.points.append([float(v) for v in np.asarray(point).ravel()])
        self.values.append(float(value))
        if value < self.f_min:
            self.f_min = float(value)
            self.incumbent_index = len(self.values) - 1
            return True
        return False

    @property
    def points_array(self) -> np.ndarray:
        """Points as an ``(n, d)`` array."""
        return np.asarray(self.points, dtype=float)

    @property
    def incumbent(self) -> np.ndarray:
        """Best-so-far point."""
        return np.asarray(self.points[self.incumbent_index], dtype=float)

    def to_dataset(self) -> Dataset:
        """Numeric content for surrogate fitting."""
        return Dataset(points=self.points_array, values=np.asarray(self.values))


class TraceRecord(BaseModel):
    """One evaluation of a run."""

    iteration: int
    phase: Literal["init", "bo"]
    point: list[float]
    y: float
    incumbent: float
    regret: float
    log10_regret: float
    ubr_raw: float = math.nan
    ubr_smoothed: float = math.nan
    gradient: float = math.nan
    max_abs_gradient: float = math.nan
    converged: bool = False
    alpha: float = math.nan
    alpha_after: float = math.nan
    a_explore: float = math.nan
    a_exploit: float = math.nan
    adjusted: bool = False
    acquisition: str = ""
    wall_time: float = 0.0


class RunTrace(BaseModel):
    """Complete record of one run."""

    objective_id: str
    schedule: str
    seed: int
    instance: Optional[int] = None
    f_opt: float
    records: list[TraceRecord] = Field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        """Trace table with the published column order."""
        frame = pd.DataFrame([r.model_dump() for r in self.records])
        if frame.empty:
            return pd.DataFrame(columns=TRACE_COLUMNS)
        return frame[TRACE_COLUMNS]

    def to_csv(self, path) -> None:
        """
        Write the trace table.

        :param path: destination file
        """
        self.to_frame().to_csv(path, index=False, na_rep="", lineterminator="\n")

    @property
    def bo_records(self) -> list[TraceRecord]:
        """Records of the sequential phase."""
        return [r for r in self.records if r.phase == "bo"]

    def summary(self) -> dict:
        """JSON-ready run summary."""
        bo = self.bo_records
        final = self.records[-1] if self.records else None
        events = [
            {
                "iteration": r.iteration,
                "gradient": r.gradient,
                "max_abs_gradient": r.max_abs_gradient,
                "alpha": r.alpha,
                "alpha_after": r.alpha_after,
            }
            for r in bo
            if r.adjusted
        ]
        return {
            "objective_id": self.objective_id,
            "schedule": self.schedule,
            "seed": self.seed,
            "instance": self.instance,
            "evaluations": len(self.records),
            "final_regret": final.regret if final else None,
            "final_log10_regret": final.log10_regret if final else None,
            "adjust_events": len(events),
            "events": events,
            "alpha_trajectory": [None if math.isnan(r.alpha) else r.alpha for r in bo],
        }


def log10_regret(regret: float, exact_zero: bool = False) -> float:
    """
    Base-10 log regret with a floor.

    :param regret: incumbent minus optimum
    :param exact_zero: report exact-zero regret with the sentinel value
    :return: log regret
    """
    if exact_zero and regret == 0.0:
        return ZERO_REGRET_SENTINEL
    return math.log10(max(regret, REGRET_FLOOR))
