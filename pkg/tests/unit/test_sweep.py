"""Tests for parameter sweeps."""

import csv

import pytest

from navigo_cli.cli.sweep import (
    SWEEP_METRICS,
    SweepCell,
    aggregate,
    plan_cells,
    run_sweep,
    write_sweep_csv,
)
from navigo_core.core.errors import ConfigError


def report(**values):
    base = dict.fromkeys(SWEEP_METRICS, 0.0)
    base.update(values)
    return base


class TestPlanCells:
    """Test sweep expansion."""

    def test_values_times_strategies_times_seeds(self):
        """Test that every combination becomes one cell with consecutive seeds."""
        cells = plan_cells("consumer_fraction", [0.1, 0.2], ["navigo", "flood"], 5, 3)

        assert len(cells) == 12
        assert cells[0] == SweepCell(0.1, "navigo", 5)
        assert [c.seed for c in cells[:3]] == [5, 6, 7]

    def test_seed_axis_uses_values(self):
        """Test that on the seed axis the values are the seeds."""
        cells = plan_cells("seed", [3, 8], ["navigo"], 1, 4)

        assert [c.seed for c in cells] == [3, 8]

    @pytest.mark.parametrize(
        ("axis", "values", "n_seeds"),
        [("speed", [1.0], 1), ("seed", [], 1), ("n_songs", [10.0], 0)],
    )
    def test_invalid(self, axis, values, n_seeds):
        """Test that bad sweeps are rejected before running."""
        with pytest.raises(ConfigError):
            plan_cells(axis, values, ["navigo"], 1, n_seeds)

    def test_overrides(self):
        """Test the overrides a cell applies on top of the base."""
        cell = SweepCell(50.0, "flood", 2)

        merged = cell.overrides("n_songs", {"radio.range_m": 200})

        assert merged == {
            "radio.range_m": 200,
            "workload.n_songs": 50,
            "seed": 2,
            "strategy_name": "flood",
        }
        assert isinstance(merged["workload.n_songs"], int)


class TestAggregate:
    """Test per-value statistics."""

    def test_mean_and_std(self):
        """Test sample statistics over seeds."""
        cells = plan_cells("consumer_fraction", [0.1], ["navigo"], 1, 3)
        reports = [report(success_rate=v) for v in (0.5, 0.7, 0.9)]

        (row,) = aggregate("consumer_fraction", cells, reports)

        assert row["runs"] == 3
        assert row["success_rate_mean"] == pytest.approx(0.7)
        assert row["success_rate_std"] == pytest.approx(0.2)

    def test_single_run_has_zero_std(self):
        """Test that one run gives a zero deviation."""
        cells = plan_cells("consumer_fraction", [0.1], ["navigo"], 1, 1)

        (row,) = aggregate("consumer_fraction", cells, [report(success_rate=0.4)])

        assert row["success_rate_std"] == 0.0

    def test_undefined_metrics_skipped(self):
        """Test that None values are left out and an all-None metric stays None."""
        cells = plan_cells("consumer_fraction", [0.1], ["navigo"], 1, 2)
        reports = [
            report(user_satisfaction=None, infra_load=None),
            report(user_satisfaction=0.8, infra_load=None),
        ]

        (row,) = aggregate("consumer_fraction", cells, reports)

        assert row["user_satisfaction_mean"] == pytest.approx(0.8)
        assert row["infra_load_mean"] is None

    def test_seed_axis_pools_seeds(self):
        """Test that a seed sweep gives one row per strategy with statistics over seeds."""
        cells = plan_cells("seed", [1, 2, 3], ["navigo", "flood"], 0, 1)
        values = {("navigo", 1): 0.5, ("navigo", 2): 0.7, ("navigo", 3): 0.9}
        reports = [report(success_rate=values.get((c.strategy, c.seed), 0.2)) for c in cells]

        rows = aggregate("seed", cells, reports)

        assert [(r["seed"], r["strategy"], r["runs"]) for r in rows] == [
            ("1 2 3", "navigo", 3),
            ("1 2 3", "flood", 3),
        ]
        assert rows[0]["success_rate_mean"] == pytest.approx(0.7)
        assert rows[0]["success_rate_std"] == pytest.approx(0.2)
        assert rows[1]["success_rate_std"] == 0.0

    def test_rows_per_value_and_strategy(self):
        """Test one row per (value, strategy)."""
        cells = plan_cells("consumer_fraction", [0.1, 0.2], ["navigo", "flood"], 1, 2)

        rows = aggregate("consumer_fraction", cells, [report() for _ in cells])

        assert [(r["consumer_fraction"], r["strategy"]) for r in rows] == [
            (0.1, "navigo"),
            (0.1, "flood"),
            (0.2, "navigo"),
            (0.2, "flood"),
        ]


class TestRunSweep:
    """Test execution and output."""

    def test_serial_runs_each_cell(self, mocker, tmp_path):
        """Test that each cell runs with its own overrides, in order."""
        run_cell = mocker.patch("navigo_cli.cli.sweep.run_cell", side_effect=lambda p, o: o)
        cells = plan_cells("seed", [1, 2], ["navigo"], 0, 1)

        results = run_sweep(tmp_path / "s.json", "seed", cells, {"duration_s": 5})

        assert run_cell.call_count == 2
        assert [r["seed"] for r in results] == [1, 2]
        assert all(r["duration_s"] == 5 for r in results)

    def test_csv_layout(self, tmp_path):
        """Test the sweep table columns and empty cells for undefined values."""
        cells = plan_cells("consumer_fraction", [0.1], ["navigo"], 1, 1)
        rows = aggregate("consumer_fraction", cells, [report(rtt_p95_ms=None)])

        path = write_sweep_csv(tmp_path / "out" / "sweep.csv", "consumer_fraction", rows)

        with open(path, encoding="utf-8", newline="") as f:
            (written,) = list(csv.DictReader(f))
        assert list(written)[:3] == ["consumer_fraction", "strategy", "runs"]
        assert written["rtt_p95_ms_mean"] == ""
        assert written["strategy"] == "navigo"
