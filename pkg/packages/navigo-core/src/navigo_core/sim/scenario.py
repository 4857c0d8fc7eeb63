"""Scenario assembly and pre-run validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from navigo_core.core.config_service import ConfigService, ScenarioConfig
from navigo_core.core.errors import ConfigError, GeoDomainError, RoadGraphError
from navigo_core.core.models import Position
from navigo_core.geo.grid import GeoGrid
from navigo_core.geo.road_graph import (
    JunctionParams,
    LaneWeights,
    RoadGraph,
    RoadSegment,
    read_road_csv,
)
from navigo_core.sim.mobility import MobilityTrace, load_trace
from navigo_core.strategies.registry import get_strategy

logger = logging.getLogger(__name__)


@dataclass
class Scenario:
    """
    Everything a run needs, validated.

    Attributes:
        config: Scenario configuration
        graph: Road graph
        grid: Geo-area grid
        trace: Vehicle mobility
        base_dir: Directory relative paths resolve against
        off_road: Trace samples beyond the road tolerance (vehicle, time, distance)
    """

    config: ScenarioConfig
    graph: RoadGraph
    grid: GeoGrid
    trace: MobilityTrace
    base_dir: Path = field(default_factory=Path.cwd)
    off_road: list[tuple[str, float, float]] = field(default_factory=list)

    @property
    def output_dir(self) -> Path:
        return self.config.output_dir(self.base_dir)


def make_grid(config: ScenarioConfig) -> GeoGrid:
    g = config.grid
    try:
        return GeoGrid(
            tag=g.tag,
            base_extent=g.base_extent_m,
            world_width=g.world_width_m,
            world_height=g.world_height_m,
            default_precision=g.precision,
        )
    except GeoDomainError as e:
        raise ConfigError(str(e), key="grid") from e


def build_graph(config: ScenarioConfig, segments: list[RoadSegment]) -> RoadGraph:
    """
    Raises:
        RoadGraphError: On an empty road network or a bad segment
    """
    if not segments:
        raise RoadGraphError("Road network has no segments")
    road = config.road
    params = JunctionParams(
        fp1_radius=road.fp1_radius_m,
        fp2_radius=road.fp2_radius_m,
        collinearity_tolerance_deg=road.collinearity_tolerance_deg,
        dedup_distance=road.dedup_distance_m,
    )
    return RoadGraph.build(segments, params, LaneWeights(road.weights_by_lanes()))


def build_scenario(
    config: ScenarioConfig,
    segments: list[RoadSegment],
    trace: MobilityTrace,
    base_dir: Path | None = None,
) -> Scenario:
    """
    Assemble and validate a scenario from in-memory parts.

    Raises:
        ConfigError: On an unknown strategy, an RSU outside the grid or a scripted
            session naming a vehicle absent from the trace
        RoadGraphError: On a bad road network
    """
    get_strategy(config.strategy_name)
    grid = make_grid(config)
    graph = build_graph(config, segments)
    lo, hi = graph.bounds()
    for corner in (lo, hi):
        if not grid.contains(corner):
            raise ConfigError(f"road network extends outside the grid at {corner}", key="grid")
    for rsu in config.rsus:
        if not grid.contains(Position(rsu.x, rsu.y)):
            raise ConfigError(f"RSU {rsu.rsu_id} lies outside the grid", key="rsus")
    known = set(trace.vehicles())
    for spec in config.workload.sessions:
        if spec.vehicle not in known:
            raise ConfigError(
                f"vehicle {spec.vehicle!r} is not in the trace", key="workload.sessions"
            )
        if spec.prebind_area is not None:
            try:
                grid.parse_label(spec.prebind_area)
            except (GeoDomainError, ValueError) as e:
                raise ConfigError(str(e), key="workload.sessions") from None

    off_road = trace.off_road(graph, config.road.trace_tolerance_m)
    if off_road:
        vehicle, t, d = off_road[0]
        logger.warning(
            f"{len(off_road)} trace samples are off-road "
            f"(first: {vehicle} at {t:g} s, {d:.1f} m from the nearest street)"
        )
    logger.info(
        f"Scenario {config.name!r}: {len(graph)} road nodes, {len(trace)} vehicles, "
        f"{len(config.rsus)} RSUs, strategy {config.strategy_name}"
    )
    return Scenario(config, graph, grid, trace, base_dir or Path.cwd(), off_road)


def load_scenario(config: ScenarioConfig, base_dir: Path) -> Scenario:
    """
    Read the road and trace files named by ``config`` and validate the whole.

    Raises:
        RoadGraphError: On a bad road file
        TraceError: On a bad trace file
        ConfigError: On inconsistent configuration
    """
    road_path = config.road_path(base_dir)
    if not road_path.exists():
        raise ConfigError(f"road file not found: {road_path}", key="road_file")
    segments = read_road_csv(road_path)
    trace = load_trace(config.trace_path(base_dir))
    return build_scenario(config, segments, trace, base_dir)


def load_scenario_file(
    config_path: Path, overrides: dict[str, object] | None = None
) -> Scenario:
    """Load a config file, apply dotted overrides and load its scenario."""
    service = ConfigService(config_path)
    config = service.load_config(overrides)
    return load_scenario(config, service.base_dir)
