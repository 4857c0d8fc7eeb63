"""Parameter sweeps: one isolated run per (value, strategy, seed) cell, aggregated per value."""

import csv
import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from navigo_core.core.errors import ConfigError
from navigo_core.sim.runner import Simulation
from navigo_core.sim.scenario import load_scenario_file

logger = logging.getLogger(__name__)

# Sweep axis -> dotted config key
SWEEP_AXES = {
    "consumer_fraction": "workload.consumer_fraction",
    "seed": "seed",
    "n_songs": "workload.n_songs",
}

SWEEP_METRICS = (
    "success_rate",
    "user_satisfaction",
    "channel_accesses_per_satisfied",
    "infra_load",
    "infra_offload",
    "offload_mules_only",
    "rtt_p95_ms",
    "max_faces_per_prefix",
    "mean_queue_depth",
)


@dataclass(frozen=True)
class SweepCell:
    """One run of a sweep."""

    value: float
    strategy: str
    seed: int

    def overrides(self, axis: str, base: dict[str, Any]) -> dict[str, Any]:
        merged = dict(base)
        merged[SWEEP_AXES[axis]] = int(self.value) if axis != "consumer_fraction" else self.value
        merged["seed"] = self.seed
        merged["strategy_name"] = self.strategy
        return merged


def plan_cells(
    axis: str, values: Sequence[float], strategies: Sequence[str], seed: int, n_seeds: int
) -> list[SweepCell]:
    """
    Expand a sweep into cells. On the seed axis the values are the seeds themselves.

    Raises:
        ConfigError: If the axis is unknown or there is nothing to run
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r} (available: {', '.join(SWEEP_AXES)})")
    if not values:
        raise ConfigError("sweep needs at least one value")
    if n_seeds < 1:
        raise ConfigError("must be at least 1", key="seeds")
    if axis == "seed":
        return [SweepCell(v, s, int(v)) for v in values for s in strategies]
    return [
        SweepCell(v, s, seed + i) for v in values for s in strategies for i in range(n_seeds)
    ]


def run_cell(config_path: str, overrides: dict[str, Any]) -> dict[str, Any]:
    """Run one cell from scratch; module level so worker processes can pickle it."""
    simulation = Simulation(load_scenario_file(Path(config_path), overrides))
    return simulation.run().to_dict()


def run_sweep(
    config_path: Path,
    axis: str,
    cells: list[SweepCell],
    base_overrides: dict[str, Any],
    jobs: int = 1,
) -> list[dict[str, Any]]:
    """
    Run every cell, serially or across ``jobs`` worker processes.

    Returns:
        One report dict per cell, in cell order
    """
    arguments = [(str(config_path), cell.overrides(axis, base_overrides)) for cell in cells]
    logger.info(f"Sweeping {axis} over {len(cells)} runs with {jobs} job(s)")
    if jobs <= 1:
        return [run_cell(*a) for a in arguments]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_cell, *a) for a in arguments]
        return [f.result() for f in futures]


def aggregate(
    axis: str, cells: list[SweepCell], reports: list[dict[str, Any]]
) -> list[dict[str, Any]]:
    """
    Mean and standard deviation of each headline metric per (value, strategy).

    On the seed axis the seeds are the samples: each strategy gets one row whose axis
    column lists the seeds. Metrics that were undefined in a run (None) are left out of
    that row's statistics.
    """
    groups: dict[tuple[float | None, str], list[dict[str, Any]]] = {}
    seeds: dict[str, list[int]] = {}
    for cell, report in zip(cells, reports):
        value = None if axis == "seed" else cell.value
        groups.setdefault((value, cell.strategy), []).append(report)
        seeds.setdefault(cell.strategy, []).append(cell.seed)
    rows = []
    for (value, strategy), group in groups.items():
        label = " ".join(str(s) for s in seeds[strategy]) if value is None else value
        row: dict[str, Any] = {axis: label, "strategy": strategy, "runs": len(group)}
        for metric in SWEEP_METRICS:
            samples = np.array([r[metric] for r in group if r[metric] is not None], dtype=float)
            if samples.size == 0:
                row[f"{metric}_mean"] = None
                row[f"{metric}_std"] = None
                continue
            row[f"{metric}_mean"] = float(samples.mean())
            row[f"{metric}_std"] = float(samples.std(ddof=1)) if samples.size > 1 else 0.0
        rows.append(row)
    return rows


def write_sweep_csv(path: Path, axis: str, rows: list[dict[str, Any]]) -> Path:
    header = [axis, "strategy", "runs"]
    for metric in SWEEP_METRICS:
        header += [f"{metric}_mean", f"{metric}_std"]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=header)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else v for k, v in row.items()})
    logger.info(f"Sweep table written to {path}")
    return path
