"""Desk-scale scenario generator: Manhattan grid roads and random-turn vehicle traces."""

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from navigo_core.core.config_service import (
    ConfigService,
    GridConfig,
    RsuConfig,
    ScenarioConfig,
)
from navigo_core.core.errors import ConfigError
from navigo_core.core.models import Position
from navigo_core.geo.road_graph import RoadSegment, write_road_csv
from navigo_core.sim.mobility import TraceSample, write_trace_csv

logger = logging.getLogger(__name__)

LANES_PATTERNS = ("uniform2", "uniform4", "avenues6")
GRID_MARGIN_M = 100.0
SPEED_RANGE_MPS = (8.0, 14.0)
SAMPLE_PERIOD_S = 1.0


@dataclass(frozen=True)
class GridSpec:
    """
    Manhattan grid parameters.

    Attributes:
        rows: Junction rows
        cols: Junction columns
        block_m: Distance between neighbouring junctions
        lanes_pattern: "uniform2", "uniform4" or "avenues6" (central row and column 6 lanes)
    """

    rows: int = 5
    cols: int = 5
    block_m: float = 200.0
    lanes_pattern: str = "uniform2"

    def __post_init__(self) -> None:
        if self.rows < 2 or self.cols < 2:
            raise ConfigError("grid needs at least 2x2 junctions", key="rows")
        if self.block_m <= 0:
            raise ConfigError("must be positive", key="block_m")
        if self.lanes_pattern not in LANES_PATTERNS:
            raise ConfigError(f"must be one of {LANES_PATTERNS}", key="lanes_pattern")

    def junction(self, r: int, c: int) -> Position:
        return Position(GRID_MARGIN_M + c * self.block_m, GRID_MARGIN_M + r * self.block_m)

    @property
    def width(self) -> float:
        return 2 * GRID_MARGIN_M + (self.cols - 1) * self.block_m

    @property
    def height(self) -> float:
        return 2 * GRID_MARGIN_M + (self.rows - 1) * self.block_m

    def lanes(self, r1: int, c1: int, r2: int, c2: int) -> int:
        if self.lanes_pattern == "uniform2":
            return 2
        if self.lanes_pattern == "uniform4":
            return 4
        # avenues6: the middle row and column are wide
        if r1 == r2 == self.rows // 2 or c1 == c2 == self.cols // 2:
            return 6
        return 2


def grid_segments(spec: GridSpec) -> list[RoadSegment]:
    """Every street block of the grid: rows*(cols-1) + cols*(rows-1) segments."""
    segments = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            if c + 1 < spec.cols:
                lanes = spec.lanes(r, c, r, c + 1)
                segments.append(RoadSegment(spec.junction(r, c), spec.junction(r, c + 1), lanes))
            if r + 1 < spec.rows:
                lanes = spec.lanes(r, c, r + 1, c)
                segments.append(RoadSegment(spec.junction(r, c), spec.junction(r + 1, c), lanes))
    return segments


def random_turn_trace(
    spec: GridSpec, n_cars: int, duration_s: float, rng: np.random.Generator
) -> list[TraceSample]:
    """
    Cars start at random junctions and drive block by block at a constant speed,
    picking the next block uniformly at each junction (U-turns only at dead ends).

    Samples are taken every second and at every junction passage, so linear
    interpolation between samples never leaves the road.
    """
    samples: list[TraceSample] = []
    for car in range(n_cars):
        vehicle = f"car{car}"
        speed = float(rng.uniform(*SPEED_RANGE_MPS))
        here = (int(rng.integers(spec.rows)), int(rng.integers(spec.cols)))
        came_from: tuple[int, int] | None = None
        t = 0.0
        times: list[float] = []
        points: list[Position] = []

        def add(time_s: float, pos: Position) -> None:
            time_s = round(time_s, 3)
            if times and time_s - times[-1] < 0.01:
                return
            times.append(time_s)
            points.append(pos)

        add(0.0, spec.junction(*here))
        while t < duration_s:
            options = [
                (here[0] + dr, here[1] + dc)
                for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if 0 <= here[0] + dr < spec.rows and 0 <= here[1] + dc < spec.cols
            ]
            forward = [o for o in options if o != came_from] or options
            nxt = forward[int(rng.integers(len(forward)))]
            a, b = spec.junction(*here), spec.junction(*nxt)
            leg = spec.block_m / speed

            def along(
                time_s: float, start: float = t, a: Position = a, b: Position = b, leg: float = leg
            ) -> Position:
                frac = (time_s - start) / leg
                return Position(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y))

            end = min(t + leg, duration_s)
            tick = math.floor(t / SAMPLE_PERIOD_S + 1) * SAMPLE_PERIOD_S
            while tick < end:
                add(tick, along(tick))
                tick += SAMPLE_PERIOD_S
            add(end, along(end))
            t += leg
            came_from, here = here, nxt
        samples.extend(
            TraceSample(ts, vehicle, p.x, p.y, speed) for ts, p in zip(times, points)
        )
    return sorted(samples, key=lambda s: (s.time_s, s.vehicle_id))


def generate_grid_scenario(
    output_dir: Path,
    spec: GridSpec,
    n_cars: int,
    duration_s: float,
    seed: int = 1,
    name: str | None = None,
) -> Path:
    """
    Write ``roads.csv``, ``trace.csv`` and ``scenario.json`` into ``output_dir``.

    The single RSU sits at the junction closest to the grid centre.

    Returns:
        Path of the scenario file
    """
    if n_cars < 0:
        raise ConfigError("must be non-negative", key="n_cars")
    if duration_s <= 0:
        raise ConfigError("must be positive", key="duration_s")
    output_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    segments = grid_segments(spec)
    write_road_csv(output_dir / "roads.csv", segments)
    write_trace_csv(output_dir / "trace.csv", random_turn_trace(spec, n_cars, duration_s, rng))
    centre = spec.junction(spec.rows // 2, spec.cols // 2)
    config = replace(
        ScenarioConfig(),
        name=name or f"grid{spec.rows}x{spec.cols}",
        seed=seed,
        duration_s=duration_s,
        road_file="roads.csv",
        trace_file="trace.csv",
        grid=GridConfig(world_width_m=spec.width, world_height_m=spec.height),
        rsus=(RsuConfig("rsu0", centre.x, centre.y),),
    )
    config_path = output_dir / "scenario.json"
    ConfigService(config_path).save_config(config)
    logger.info(
        f"Generated {spec.rows}x{spec.cols} grid ({len(segments)} segments, {n_cars} cars) "
        f"in {output_dir}"
    )
    return config_path
