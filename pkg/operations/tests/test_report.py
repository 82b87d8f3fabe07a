"""Test report emission module."""

import pandas as pd
import pytest

from conftest import override_get_settings
from exceptions import FitError, MissingManifest
from models.controller import SchedulePolicy
from models.experiment import ExperimentConfig, Manifest
from operations import experiment_runner
from operations.experiment_runner import MANIFEST_FILE, ExperimentRunner
from operations.report import ReportEmitter


@pytest.fixture
def experiment_dir(small_experiment_config, tmp_path):
    """Experiment directory produced by the small experiment config."""
    out = tmp_path / "experiment"
    ExperimentRunner(override_get_settings()).run_experiment(
        small_experiment_config, out
    )
    return out


@pytest.fixture
def emitter():
    """Report emitter with mocked settings."""
    return ReportEmitter(override_get_settings())


class TestReportEmitter:
    """Test ReportEmitter operations class."""

    def test_tables(self, emitter, experiment_dir):
        """Test the rank, regret and diagnostic tables."""
        emitter.emit_report(experiment_dir)
        report = experiment_dir / "report"

        ranks = pd.read_csv(report / "ranks_per_step.csv")
        assert ranks["step"].tolist() == [1, 2, 3, 4]
        assert "SAWEI ci95" in ranks.columns
        schedules = ["SAWEI", "WEI(0.5)", "EI->PI(50%)"]
        assert (ranks[schedules].sum(axis=1) - 6.0).abs().max() < 1e-9

        final = pd.read_csv(report / "final_ranks.csv")
        assert final["schedule"].tolist() == schedules

        summary = pd.read_csv(report / "final_regret_summary.csv")
        assert len(summary) == 6 and (summary["runs"] == 5).all()
        assert len(pd.read_csv(report / "final_regret_runs.csv")) == 30

        switch = pd.read_csv(report / "ubr_switch.csv")
        assert len(switch) == 2
        assert (switch["switch_step"] == 3).all()
        assert (switch["iteration"] == 7).all()

        drift = pd.read_csv(report / "alpha_drift.csv")
        assert drift["task"].tolist() == ["sphere_2d", "rastrigin_2d"]
        assert drift["alpha_first_half"].between(0.0, 1.0).all()

    def test_plots_are_deterministic(self, emitter, experiment_dir):
        """Test regenerated reports, figures included, are byte-identical."""
        first = emitter.emit_report(experiment_dir, plots=True)
        contents = {p.name: p.read_bytes() for p in first}
        second = emitter.emit_report(experiment_dir, plots=True)
        assert {p.name: p.read_bytes() for p in second} == contents
        names = {p.name for p in first}
        for name in ("ranks_per_step.svg", "ubr_sphere_2d.svg", "alpha_sphere_2d.svg"):
            assert name in names

    def test_missing_manifest(self, emitter, tmp_path):
        """Test an empty directory has nothing to report."""
        with pytest.raises(MissingManifest):
            emitter.emit_report(tmp_path)

    def test_manifest_without_schedules(self, emitter, tmp_path):
        """Test a manifest listing no schedules is rejected."""
        manifest = Manifest(
            fingerprint="0", tasks=[], schedules=[], seeds=[], bo_budget=1
        )
        (tmp_path / MANIFEST_FILE).write_text(manifest.model_dump_json())
        with pytest.raises(MissingManifest):
            emitter.emit_report(tmp_path)

    def test_schedule_aborted_everywhere(
        self, emitter, small_experiment_config, tmp_path, monkeypatch
    ):
        """Test a schedule without finished runs is left out of the ranks only."""
        real_run_bo = experiment_runner.run_bo

        def failing_switch(objective, config, *args):
            if config.schedule.kind == "switch_ei_pi":
                raise FitError("likelihood optimization failed")
            return real_run_bo(objective, config, *args)

        monkeypatch.setattr("operations.experiment_runner.run_bo", failing_switch)
        out = tmp_path / "partial"
        manifest = ExperimentRunner(override_get_settings()).run_experiment(
            small_experiment_config, out
        )
        assert len(manifest.aborted) == 10

        names = {p.name for p in emitter.emit_report(out, plots=True)}
        assert "ranks_per_step.svg" in names
        report = out / "report"
        ranks = pd.read_csv(report / "ranks_per_step.csv")
        assert (ranks[["SAWEI", "WEI(0.5)"]].sum(axis=1) - 3.0).abs().max() < 1e-9
        assert "EI->PI(50%)" not in ranks.columns
        final = pd.read_csv(report / "final_ranks.csv")
        assert final["schedule"].tolist() == ["SAWEI", "WEI(0.5)"]
        assert len(pd.read_csv(report / "final_regret_summary.csv")) == 4
        assert len(pd.read_csv(report / "ubr_switch.csv")) == 0
        assert len(pd.read_csv(report / "alpha_drift.csv")) == 2

    def test_every_run_aborted(
        self, emitter, small_experiment_config, tmp_path, monkeypatch
    ):
        """Test an experiment without finished runs still gets a report."""

        def failing_run(*args):
            raise FitError("likelihood optimization failed")

        monkeypatch.setattr("operations.experiment_runner.run_bo", failing_run)
        ExperimentRunner(override_get_settings()).run_experiment(
            small_experiment_config, tmp_path
        )
        names = {p.name for p in emitter.emit_report(tmp_path)}
        assert "ranks_per_step.csv" not in names
        assert {"ubr_switch.csv", "alpha_drift.csv"} <= names

    @pytest.mark.parametrize(
        "policy,expected",
        [
            (SchedulePolicy(kind="switch_ei_pi", fraction=0.25), 64),
            (SchedulePolicy(kind="switch_ei_pi", fraction=0.5), 128),
            (SchedulePolicy(kind="sawei"), None),
        ],
    )
    def test_switch_step(self, policy, expected):
        """
        Test the step where EI hands over to PI.

        :param policy: schedule policy
        :param expected: 0-based switch step
        """
        assert ReportEmitter.switch_step(policy, 256) == expected


@pytest.mark.slow
def test_desk_scale_suite(tmp_path):
    """Test SAWEI ranks at least average on the five-function suite, reproducibly."""
    cfg = ExperimentConfig.model_validate(
        {
            "tasks": [
                {"function": name, "dimension": 2}
                for name in ("sphere", "rosenbrock", "rastrigin", "schwefel", "katsuura")
            ],
            "schedules": [
                {"kind": "sawei"},
                {"kind": "static", "alpha": 0.0},
                {"kind": "static", "alpha": 0.5},
                {"kind": "static", "alpha": 1.0},
                {"kind": "switch_ei_pi", "fraction": 0.5},
                {"kind": "pulse"},
                {"kind": "portfolio"},
            ],
            "seeds": [0, 1, 2, 3, 4],
            "run": {"init_design": {"size": 8}, "bo_budget": 60},
        }
    )
    settings = override_get_settings()
    runner, emitter = ExperimentRunner(settings, workers=4), ReportEmitter(settings)
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        assert not runner.run_experiment(cfg, out).aborted
        emitter.emit_report(out)

    for pattern in ("traces/**/*.csv", "report/*.csv"):
        paths = sorted(first.glob(pattern))
        assert paths
        for path in paths:
            assert path.read_bytes() == (second / path.relative_to(first)).read_bytes()

    final = pd.read_csv(first / "report" / "final_ranks.csv")
    assert len(final) == 7
    ranks = dict(zip(final["schedule"], final["final_rank"]))
    assert ranks["SAWEI"] <= final["final_rank"].mean()

    drift = pd.read_csv(first / "report" / "alpha_drift.csv").set_index("task")
    schwefel = drift.loc["schwefel_2d"]
    assert 0.0 <= schwefel["alpha_first_half"] <= 1.0
    assert 0.0 <= schwefel["alpha_second_half"] <= 1.0
    switch = pd.read_csv(first / "report" / "ubr_switch.csv")
    assert len(switch) == 5
    assert (switch["switch_step"] == 31).all() and (switch["iteration"] == 39).all()
