"""Geographic naming grid and road topology."""

from navigo_core.geo.grid import GeoArea, GeoGrid
from navigo_core.geo.road_graph import (
    Junction,
    LaneWeights,
    PathResult,
    RoadGraph,
    RoadSegment,
    edge_cost,
    read_road_csv,
    write_road_csv,
)

__all__ = [
    "GeoArea",
    "GeoGrid",
    "Junction",
    "LaneWeights",
    "PathResult",
    "RoadGraph",
    "RoadSegment",
    "edge_cost",
    "read_road_csv",
    "write_road_csv",
]
