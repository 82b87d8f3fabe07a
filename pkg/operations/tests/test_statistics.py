"""Test aggregation statistics module."""

import pytest

from exceptions import GridMismatch
from operations.statistics import (
    interquartile_mean,
    iqm_curve,
    min_max_normalize,
    ranks_per_step,
)


class TestInterquartileMean:
    """Test interquartile mean helpers."""

    @pytest.mark.parametrize(
        "values,expected",
        [
            ([1, 2, 3, 4, 5, 6, 7, 8], 4.5),
            ([1, 2, 3, 100], 2.5),
            ([5.0], 5.0),
        ],
    )
    def test_values(self, values, expected):
        """
        Test known interquartile means.

        :param values: sample
        :param expected: IQM
        """
        assert interquartile_mean(values) == pytest.approx(expected)

    def test_curve(self):
        """Test the per-step IQM across runs."""
        curves = [[1.0, 10.0], [2.0, 20.0], [3.0, 30.0], [400.0, 40.0]]
        assert iqm_curve(curves) == pytest.approx([2.5, 25.0])

    def test_curve_length_mismatch(self):
        """Test runs of different lengths are rejected."""
        with pytest.raises(GridMismatch):
            iqm_curve([[1.0, 2.0], [1.0]])


class TestMinMaxNormalize:
    """Test min_max_normalize function."""

    def test_scales_to_unit_interval(self):
        """Test the extremes map to 0 and 1."""
        assert min_max_normalize([2.0, 4.0, 6.0]) == [0.0, 0.5, 1.0]

    def test_constant_sample(self):
        """Test a constant sample maps to zeros."""
        assert min_max_normalize([3.0, 3.0]) == [0.0, 0.0]


class TestRanksPerStep:
    """Test ranks_per_step function."""

    def test_single_task(self):
        """Test lower regret ranks first and ties share the average rank."""
        report = ranks_per_step({"t": {"A": [1.0, 2.0], "B": [2.0, 2.0]}})
        assert report.mean_ranks == {"A": [1.0, 1.5], "B": [2.0, 1.5]}
        assert report.ci_ranks == {"A": [0.0, 0.0], "B": [0.0, 0.0]}

    def test_final_rank_table(self):
        """Test the final table is the IQM of final-step ranks over tasks."""
        curves = {
            "t1": {"A": [1.0], "B": [2.0], "C": [3.0]},
            "t2": {"A": [2.0], "B": [1.0], "C": [3.0]},
        }
        report = ranks_per_step(curves)
        assert report.final_ranks == pytest.approx({"A": 1.5, "B": 1.5, "C": 3.0})
        assert report.schedules == ["A", "B", "C"]

    def test_ranks_sum_per_step(self):
        """Test mean ranks sum to k(k+1)/2 at every step."""
        curves = {
            "t1": {"A": [3.0, 1.0, 1.0], "B": [2.0, 1.0, 0.5], "C": [1.0, 4.0, 2.0]},
            "t2": {"A": [0.1, 0.2, 0.3], "B": [0.3, 0.2, 0.1], "C": [0.2, 0.2, 0.2]},
        }
        report = ranks_per_step(curves)
        for step in range(3):
            total = sum(report.mean_ranks[s][step] for s in report.schedules)
            assert total == pytest.approx(6.0)

    def test_confidence_interval(self):
        """Test the 95% half-width over two tasks."""
        curves = {
            "t1": {"A": [1.0], "B": [2.0]},
            "t2": {"A": [2.0], "B": [1.0]},
        }
        report = ranks_per_step(curves)
        assert report.mean_ranks == {"A": [1.5], "B": [1.5]}
        assert report.ci_ranks["A"][0] == pytest.approx(0.98, abs=1e-9)

    @pytest.mark.parametrize(
        "curves",
        [
            {},
            {"t1": {"A": [1.0], "B": [2.0]}, "t2": {"A": [1.0]}},
            {"t1": {"A": [1.0, 2.0], "B": [2.0]}},
            {"t1": {"A": [1.0], "B": [2.0]}, "t2": {"A": [1.0, 2.0], "B": [2.0, 1.0]}},
        ],
    )
    def test_grid_mismatch(self, curves):
        """
        Test inconsistent schedule sets and step grids are rejected.

        :param curves: malformed input
        """
        with pytest.raises(GridMismatch):
            ranks_per_step(curves)
