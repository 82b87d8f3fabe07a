"""Configuration tests module."""

import os

import numpy as np
import pandas as pd
import pytest

from models.controller import SchedulePolicy
from models.experiment import ExperimentConfig, RunTemplate, TaskSpec
from models.run import InitDesign, RunConfig
from models.search import SearchBudget
from models.surrogate import GpConfig


def override_get_settings():
    """Overridden get_settings dependency."""

    class MockSettings:
        seed_offset = 0
        log_level = "WARNING"
        workers = 1
        plot_format = "svg"

    return MockSettings()


def small_search_budget() -> SearchBudget:
    """Acquisition optimizer budget small enough for unit tests."""
    return SearchBudget(n_random=256, n_local_starts=3, local_steps=5)


def small_run_config(**overrides) -> RunConfig:
    """
    Sphere 2d run with a small budget.

    :param overrides: RunConfig fields to replace
    """
    fields = {
        "objective_id": "sphere_2d",
        "dimension": 2,
        "init_design": InitDesign(size=8),
        "bo_budget": 12,
        "gp": GpConfig(fit_restarts=2),
        "search": small_search_budget(),
        "seed": 0,
    }
    fields.update(overrides)
    return RunConfig(**fields)


def pytest_configure(config):
    """Register the slow marker."""
    config.addinivalue_line(
        "markers", "slow: desk-scale benchmark, runs only with SAWEI_RUN_SLOW=1"
    )


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless SAWEI_RUN_SLOW=1."""
    if os.environ.get("SAWEI_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set SAWEI_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Seeded random generator fixture."""
    return np.random.default_rng(0)


@pytest.fixture
def tabular_csv(tmp_path):
    """
    20-row tabular benchmark with a unique minimum.

    :param tmp_path: pytest temporary directory
    """
    generator = np.random.default_rng(7)
    frame = pd.DataFrame(
        {
            "learning_rate": np.round(np.linspace(0.001, 0.1, 20), 6),
            "depth": np.tile([2, 4, 6, 8], 5),
        }
    )
    frame["objective"] = np.round(generator.uniform(0.1, 1.0, 20), 6)
    frame.loc[13, "objective"] = 0.05
    path = tmp_path / "toy_table.csv"
    frame.to_csv(path, index=False)
    return path


@pytest.fixture
def small_experiment_config():
    """Two tasks x three schedules x five seeds with tiny budgets."""
    return ExperimentConfig(
        tasks=[
            TaskSpec(function="sphere", dimension=2),
            TaskSpec(function="rastrigin", dimension=2),
        ],
        schedules=[
            SchedulePolicy(kind="sawei"),
            SchedulePolicy(kind="static", alpha=0.5),
            SchedulePolicy(kind="switch_ei_pi", fraction=0.5),
        ],
        seeds=[0, 1, 2, 3, 4],
        run=RunTemplate(
            init_design=InitDesign(size=4),
            bo_budget=4,
            gp=GpConfig(fit_restarts=1),
            search=SearchBudget(n_random=64, n_local_starts=2, local_steps=2),
        ),
    )
