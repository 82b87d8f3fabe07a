"""Experiment models module."""

import itertools
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from models.controller import AttitudeMode, ControllerSettings, SchedulePolicy
from models.run import InitDesign
from models.search import SearchBudget
from models.surrogate import GpConfig


class TaskSpec(BaseModel):
    """Benchmark task: a synthetic function or a tabular file."""

    kind: Literal["synthetic", "tabular"] = "synthetic"
    function: Optional[str] = None
    dimension: int = Field(default=2, gt=0)
    instances: list[int] = Field(default_factory=lambda: [1])
    path: Optional[str] = None
    name: str = ""

    @model_validator(mode="after")
    def check_source(self) -> "TaskSpec":
        """Synthetic tasks name a function, tabular tasks a file."""
        if self.kind == "synthetic" and not self.function:
            raise ValueError("synthetic task needs a function id")
        if self.kind == "tabular" and not self.path:
            raise ValueError("tabular task needs a path")
        if not self.instances or any(i < 1 for i in self.instances):
            raise ValueError("instances must be positive")
        if not self.name:
            if self.kind == "synthetic":
                self.name = f"{self.function}_{self.dimension}d"
            else:
                self.name = Path(str(self.path)).stem
        return self


class RunTemplate(BaseModel):
    """Run settings shared by every run of an experiment."""

    init_design: InitDesign = Field(default_factory=InitDesign)
    bo_budget: int = Field(default=256, ge=1)
    controller: ControllerSettings = Field(default_factory=ControllerSettings)
    gp: GpConfig = Field(default_factory=GpConfig)
    search: SearchBudget = Field(default_factory=SearchBudget)
    beta: float = Field(default=1.0, gt=0.0)


class ExperimentConfig(BaseModel):
    """Tasks x schedules x seeds."""

    tasks: list[TaskSpec] = Field(min_length=1)
    schedules: list[SchedulePolicy] = Field(min_length=1)
    seeds: list[int] = Field(min_length=1)
    run: RunTemplate = Field(default_factory=RunTemplate)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def check_unique_labels(self) -> "ExperimentConfig":
        """Task and schedule labels key the artifacts, so they must be unique."""
        names = [t.name for t in self.tasks]
        labels = [s.name for s in self.schedules]
        if len(set(names)) != len(names) or len(set(labels)) != len(labels):
            raise ValueError("task names and schedule labels must be unique")
        return self


class AblationGrid(BaseModel):
    """SAWEI hyperparameter grid."""

    delta_alpha: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.25])
    attitude_mode: list[AttitudeMode] = Field(
        default_factory=lambda: ["last", "inc_change", "last_adjust"]
    )
    epsilon: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.5, 1.0])

    @model_validator(mode="after")
    def check_nonempty(self) -> "AblationGrid":
        """Every axis needs a value."""
        if not (self.delta_alpha and self.attitude_mode and self.epsilon):
            raise ValueError("ablation grid axes must be nonempty")
        return self

    def combinations(self) -> list[dict]:
        """Cartesian product of the axes."""
        return [
            {"delta_alpha": d, "attitude_mode": m, "epsilon": e}
            for d, m, e in itertools.product(
                self.delta_alpha, self.attitude_mode, self.epsilon
            )
        ]


class RankReport(BaseModel):
    """Per-step IQM regrets, ranks and the final rank table."""

    schedules: list[str]
    tasks: list[str]
    iqm_regret: dict[str, dict[str, list[float]]]
    task_ranks: dict[str, dict[str, list[float]]]
    mean_ranks: dict[str, list[float]]
    ci_ranks: dict[str, list[float]]
    final_ranks: dict[str, float]


class RunEntry(BaseModel):
    """Manifest record of one run."""

    task: str
    schedule: str
    instance: Optional[int] = None
    seed: int
    status: Literal["ok", "aborted"] = "ok"
    trace: Optional[str] = None
    summary: Optional[str] = None
    error: Optional[str] = None


class Manifest(BaseModel):
    """Index of an experiment's artifacts."""

    fingerprint: str
    tasks: list[str]
    schedules: list[str]
    seeds: list[int]
    bo_budget: int
    policies: list[SchedulePolicy] = Field(default_factory=list)
    runs: list[RunEntry] = Field(default_factory=list)
    aggregates: dict[str, dict[str, str]] = Field(default_factory=dict)

    @property
    def aborted(self) -> list[RunEntry]:
        """Runs that failed."""
        return [r for r in self.runs if r.status == "aborted"]
