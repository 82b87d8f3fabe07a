"""Test Bayesian optimization loop module."""

import math

import numpy as np
import pytest

from conftest import small_run_config
from models.controller import ControllerSettings, SchedulePolicy
from models.run import (
    ZERO_REGRET_SENTINEL,
    InitDesign,
    ObservationHistory,
    RunConfig,
)
from models.search import SearchSpace
from operations.bo_loop import BayesianOptimizer, initial_design, run_bo
from operations.objectives import load_tabular, make_synthetic


class TestInitialDesign:
    """Test initial_design function."""

    @pytest.mark.parametrize("kind", ["sobol", "lhs", "uniform"])
    def test_shape_and_bounds(self, kind, rng):
        """
        Test every design fills the unit cube with the requested size.

        :param kind: design kind
        """
        points = initial_design(
            SearchSpace.unit_cube(8), InitDesign(kind=kind, size=24), rng
        )
        assert points.shape == (24, 8)
        assert np.all(points >= 0.0) and np.all(points <= 1.0)

    def test_lhs_stratifies(self, rng):
        """Test a Latin hypercube puts one point per decile and dimension."""
        points = initial_design(
            SearchSpace.unit_cube(3), InitDesign(kind="lhs", size=10), rng
        )
        for column in points.T:
            assert sorted(np.floor(column * 10).astype(int)) == list(range(10))

    def test_deterministic(self):
        """Test identical generators give identical designs."""
        space = SearchSpace.unit_cube(4)
        design = InitDesign(size=16)
        first = initial_design(space, design, np.random.default_rng(3))
        second = initial_design(space, design, np.random.default_rng(3))
        np.testing.assert_array_equal(first, second)

    def test_discrete_rows_are_distinct(self, rng):
        """Test table designs draw distinct rows and stop at the table size."""
        table = np.linspace(0.0, 1.0, 6)[:, None]
        space = SearchSpace.table(table)
        points = initial_design(space, InitDesign(size=4), rng)
        assert len({p[0] for p in points}) == 4
        assert len(initial_design(space, InitDesign(size=10), rng)) == 6


class TestUpdateIncumbent:
    """Test the incumbent rule."""

    def test_first_occurrence(self):
        """Test ties resolve to the earliest evaluation."""
        history = ObservationHistory()
        for point, value in [([0.1], 3.0), ([0.2], 1.0), ([0.3], 1.0), ([0.4], 2.0)]:
            history.add(np.array(point), value)
        point, value = BayesianOptimizer.update_incumbent(history)
        assert point.tolist() == [0.2] and value == 1.0
        assert history.incumbent_index == 1

    def test_restores_incumbent(self):
        """Test a history built without add gets its incumbent recomputed."""
        history = ObservationHistory(
            points=[[0.1], [0.2], [0.3]], values=[3.0, 1.0, 1.0]
        )
        point, value = BayesianOptimizer.update_incumbent(history)
        assert history.incumbent_index == 1 and history.f_min == value == 1.0
        assert history.incumbent.tolist() == point.tolist() == [0.2]

    def test_empty_history(self):
        """Test an empty history has no incumbent."""
        with pytest.raises(ValueError):
            BayesianOptimizer.update_incumbent(ObservationHistory())


class TestBayesianOptimizer:
    """Test BayesianOptimizer operations class."""

    @pytest.fixture
    def sphere(self):
        """Sphere 2d, instance 1."""
        return make_synthetic("sphere", 2, 1)

    def test_trace_length_and_incumbent(self, sphere):
        """Test a run records every evaluation with a nonincreasing incumbent."""
        trace = run_bo(sphere, small_run_config())
        assert len(trace.records) == 20
        assert [r.phase for r in trace.records].count("init") == 8
        incumbents = [r.incumbent for r in trace.records]
        assert all(b <= a for a, b in zip(incumbents, incumbents[1:]))
        assert all(r.regret >= 0.0 for r in trace.records)

    def test_ubr_and_adjustments(self, sphere):
        """Test UBR stays nonnegative and alpha moves only inside the gradient band."""
        config = RunConfig(
            objective_id=sphere.name,
            dimension=2,
            init_design=InitDesign(size=8),
            bo_budget=50,
            seed=0,
        )
        trace = run_bo(sphere, config)
        bo = trace.bo_records
        assert len(bo) == 50
        assert all(r.ubr_raw >= -1e-9 for r in bo)

        adjusted = [r for r in bo if r.adjusted]
        assert adjusted
        epsilon = config.controller.epsilon
        for record in adjusted:
            assert abs(record.gradient) <= epsilon * record.max_abs_gradient + 1e-12
            step = abs(record.alpha_after - record.alpha)
            clamped = record.alpha_after in (0.0, 1.0)
            assert clamped or abs(step - 0.1) < 1e-9

        for current, following in zip(bo, bo[1:]):
            expected = current.alpha_after if current.adjusted else current.alpha
            assert following.alpha == expected

        events = trace.summary()["events"]
        assert [e["iteration"] for e in events] == [r.iteration for r in adjusted]
        assert all(not math.isnan(e["alpha_after"]) for e in events)

    def test_disabled_sawei_matches_static(self, sphere, tmp_path):
        """Test SAWEI without adjustments reproduces WEI(0.5) byte for byte."""
        static = small_run_config(schedule=SchedulePolicy(kind="static", alpha=0.5))
        frozen = small_run_config(
            schedule=SchedulePolicy(kind="sawei"),
            controller=ControllerSettings(adjust_enabled=False),
        )
        run_bo(sphere, static).to_csv(tmp_path / "static.csv")
        run_bo(sphere, frozen).to_csv(tmp_path / "frozen.csv")
        static_bytes = (tmp_path / "static.csv").read_bytes()
        assert static_bytes == (tmp_path / "frozen.csv").read_bytes()

    def test_deterministic(self, sphere, tmp_path):
        """Test two runs with one seed write identical traces."""
        run_bo(sphere, small_run_config(seed=3)).to_csv(tmp_path / "a.csv")
        run_bo(sphere, small_run_config(seed=3)).to_csv(tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_tabular_exhaustive(self, tabular_csv):
        """Test a budget larger than the table reaches the recorded minimum."""
        objective = load_tabular(tabular_csv)
        config = small_run_config(
            objective_id=objective.name, init_design=InitDesign(size=2), bo_budget=20
        )
        trace = run_bo(objective, config)
        assert len(trace.records) == 22
        first_rows = {tuple(r.point) for r in trace.records[:20]}
        assert len(first_rows) == 20
        assert trace.records[-1].regret == 0.0
        assert trace.records[-1].log10_regret == ZERO_REGRET_SENTINEL

    def test_table_smaller_than_design(self, tabular_csv):
        """Test the init phase stops at the table size and BO keeps its budget."""
        objective = load_tabular(tabular_csv)
        config = small_run_config(
            objective_id=objective.name, init_design=InitDesign(size=24), bo_budget=3
        )
        trace = run_bo(objective, config)
        phases = [r.phase for r in trace.records]
        assert phases.count("init") == 20 and phases.count("bo") == 3
        assert trace.records[19].regret == 0.0

    def test_portfolio_labels(self, sphere):
        """Test portfolio runs record the chosen arm and no WEI weight."""
        config = small_run_config(
            bo_budget=4, schedule=SchedulePolicy(kind="portfolio")
        )
        trace = run_bo(sphere, config)
        for record in trace.bo_records:
            assert record.acquisition.startswith("Portfolio:")
            assert math.isnan(record.alpha)
