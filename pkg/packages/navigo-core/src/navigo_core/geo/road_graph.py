"""Road topology: lane-weighted street graph, line-of-sight streets and junction geometry."""

from __future__ import annotations

import csv
import heapq
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from navigo_core.core.errors import RoadGraphError
from navigo_core.core.models import FpClass, Position
from navigo_core.geo.grid import GeoArea

logger = logging.getLogger(__name__)

ROAD_CSV_HEADER = ["node_a_x", "node_a_y", "node_b_x", "node_b_y", "lanes"]
DEFAULT_LANE_WEIGHTS = {2: 1.0, 4: 0.7, 6: 0.25}
_COST_EPS = 1e-9


@dataclass(frozen=True)
class RoadSegment:
    """One street segment as read from the road file."""

    a: Position
    b: Position
    lanes: int

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)


@dataclass(frozen=True)
class LaneWeights:
    """
    Cost multiplier per lane count; wider roads are cheaper.

    Attributes:
        weights: lanes -> weight, strictly positive and non-increasing in lanes
    """

    weights: Mapping[int, float] = field(default_factory=lambda: dict(DEFAULT_LANE_WEIGHTS))

    def __post_init__(self) -> None:
        if not self.weights:
            raise RoadGraphError("Lane weights must not be empty")
        previous = math.inf
        for lanes in sorted(self.weights):
            weight = self.weights[lanes]
            if weight <= 0:
                raise RoadGraphError(f"Lane weight for {lanes} lanes must be positive")
            if weight > previous:
                raise RoadGraphError("Lane weights must not increase with lane count")
            previous = weight

    def weight(self, lanes: int) -> float:
        try:
            return self.weights[lanes]
        except KeyError:
            raise RoadGraphError(f"Unknown lane count: {lanes}") from None


@dataclass(frozen=True)
class JunctionParams:
    """
    Geometry parameters applied while building the graph.

    Attributes:
        fp1_radius: Core radius of a junction in meters
        fp2_radius: Outer radius of a junction in meters
        collinearity_tolerance_deg: Max bearing change merged into one street
        dedup_distance: Endpoints closer than this are the same node
    """

    fp1_radius: float = 10.0
    fp2_radius: float = 30.0
    collinearity_tolerance_deg: float = 15.0
    dedup_distance: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.fp1_radius < self.fp2_radius:
            raise RoadGraphError("Junction radii must satisfy 0 < fp1_radius < fp2_radius")
        if not 0 <= self.collinearity_tolerance_deg < 90:
            raise RoadGraphError("Collinearity tolerance must be in [0, 90) degrees")


@dataclass(frozen=True)
class Junction:
    """Intersection of degree >= 3 split into the FP1 core and the FP2 ring."""

    node_id: int
    center: Position
    fp1_radius: float
    fp2_radius: float


@dataclass(frozen=True)
class Street:
    """
    Logical edge: a chain of segments in line of sight.

    Attributes:
        street_id: Stable id, assigned in deterministic build order
        nodes: Node chain from one end to the other
        length: Sum of member lengths in meters
        cost: Sum of member weighted costs
    """

    street_id: int
    nodes: tuple[int, ...]
    length: float
    cost: float

    @property
    def ends(self) -> tuple[int, int]:
        return self.nodes[0], self.nodes[-1]


@dataclass(frozen=True)
class PathResult:
    """
    Outcome of a shortest-path query toward a destination area.

    Attributes:
        cost: Weighted route cost (inf when unreachable)
        next_hop_node: First graph node on the route
        reachable: False if no route exists
        street_id: Street the route leaves on; None when already at the destination node
    """

    cost: float
    next_hop_node: int | None
    reachable: bool
    street_id: int | None = None


@dataclass(frozen=True)
class Projection:
    """Orthogonal projection of a position onto its nearest edge (u, v)."""

    u: int
    v: int
    t: float
    point: Position
    distance: float


@dataclass
class _AreaRoutes:
    dist: dict[int, float]
    succ: dict[int, int]
    targets: frozenset[int]


def edge_cost(length_m: float, lanes: int, weights: LaneWeights | None = None) -> float:
    """
    Weighted cost of a street segment.

    Raises:
        RoadGraphError: For non-positive length or an unknown lane count
    """
    if not length_m > 0:
        raise RoadGraphError(f"Edge length must be positive, got {length_m}")
    return length_m * (weights or LaneWeights()).weight(lanes)


class RoadGraph:
    """
    Immutable street graph.

    Nodes are intersections (and shape points) with a ``pos`` attribute; edges carry
    ``length``, ``lanes``, ``bearing`` and ``cost``. After ``merge_los`` every edge also
    belongs to exactly one logical street.
    """

    def __init__(
        self,
        graph: nx.Graph,
        params: JunctionParams,
        weights: LaneWeights,
        streets: list[Street] | None = None,
    ) -> None:
        self.graph = graph
        self.params = params
        self.weights = weights
        self.junctions: dict[int, Junction] = {
            n: Junction(n, graph.nodes[n]["pos"], params.fp1_radius, params.fp2_radius)
            for n in sorted(graph.nodes)
            if graph.degree[n] >= 3
        }
        self.streets: list[Street] = streets or []
        self._edge_street: dict[tuple[int, int], int] = {}
        self._node_streets: dict[int, set[int]] = {}
        for street in self.streets:
            for a, b in zip(street.nodes, street.nodes[1:]):
                self._edge_street[_key(a, b)] = street.street_id
            for end in street.ends:
                self._node_streets.setdefault(end, set()).add(street.street_id)
        self._edges = sorted(_key(u, v) for u, v in graph.edges)
        self._seg_a = np.array([self.pos(u) for u, _ in self._edges], dtype=float).reshape(-1, 2)
        self._seg_b = np.array([self.pos(v) for _, v in self._edges], dtype=float).reshape(-1, 2)
        self._junction_ids = list(self.junctions)
        self._junction_xy = np.array(
            [self.pos(n) for n in self._junction_ids], dtype=float
        ).reshape(-1, 2)
        self._routes: dict[str, _AreaRoutes] = {}

    @classmethod
    def build(
        cls,
        segments: Iterable[RoadSegment],
        params: JunctionParams | None = None,
        weights: LaneWeights | None = None,
    ) -> RoadGraph:
        """
        Build the graph from street segments, deduplicating nearby endpoints.

        Raises:
            RoadGraphError: On zero-length segments or unknown lane counts
        """
        params = params or JunctionParams()
        weights = weights or LaneWeights()
        graph = nx.Graph()
        buckets: dict[tuple[int, int], list[int]] = {}

        def node_for(p: Position) -> int:
            cell = (math.floor(p.x), math.floor(p.y))
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for n in buckets.get((cell[0] + dx, cell[1] + dy), ()):
                        if graph.nodes[n]["pos"].distance_to(p) < params.dedup_distance:
                            return n
            n = graph.number_of_nodes()
            graph.add_node(n, pos=p)
            buckets.setdefault(cell, []).append(n)
            return n

        for index, seg in enumerate(segments, start=1):
            cost = edge_cost(seg.length, seg.lanes, weights) if seg.length > 0 else 0.0
            u, v = node_for(seg.a), node_for(seg.b)
            if u == v or cost <= 0:
                raise RoadGraphError(f"Zero-length segment #{index}")
            if graph.has_edge(u, v):
                logger.debug(f"Duplicate segment #{index} between nodes {u} and {v} ignored")
                continue
            pu, pv = graph.nodes[u]["pos"], graph.nodes[v]["pos"]
            length = pu.distance_to(pv)
            graph.add_edge(
                u,
                v,
                length=length,
                lanes=seg.lanes,
                bearing=math.atan2(pv.y - pu.y, pv.x - pu.x),
                cost=edge_cost(length, seg.lanes, weights),
            )
        built = cls(graph, params, weights)
        logger.debug(
            f"Road graph built: {graph.number_of_nodes()} nodes, "
            f"{graph.number_of_edges()} edges, {len(built.junctions)} junctions"
        )
        return built.merge_los()

    def merge_los(self) -> RoadGraph:
        """
        Fuse chains through degree-2 nodes without a turn into logical streets.

        A bearing change above the collinearity tolerance, or a node of degree != 2,
        splits the chain. Street cost is the sum of member costs.
        """
        g = self.graph
        breaks = {n for n in g.nodes if g.degree[n] != 2 or self._turn_deg(n) > self._tolerance}
        visited: set[tuple[int, int]] = set()
        streets: list[Street] = []

        def walk(start: int, first: int) -> tuple[int, ...]:
            chain = [start, first]
            while chain[-1] not in breaks and chain[-1] != start:
                prev, here = chain[-2], chain[-1]
                nxt = next(n for n in g.neighbors(here) if n != prev)
                chain.append(nxt)
            return tuple(chain)

        starts = sorted(breaks) + sorted(set(g.nodes) - breaks)
        for start in starts:
            for first in sorted(g.neighbors(start)):
                if _key(start, first) in visited:
                    continue
                chain = walk(start, first)
                edges = [_key(a, b) for a, b in zip(chain, chain[1:])]
                visited.update(edges)
                streets.append(
                    Street(
                        street_id=len(streets),
                        nodes=chain,
                        length=sum(g.edges[e]["length"] for e in edges),
                        cost=sum(g.edges[e]["cost"] for e in edges),
                    )
                )
            # a closed loop without breaks gets its first node as a break
            breaks.add(start)
        return RoadGraph(g, self.params, self.weights, streets)

    @property
    def _tolerance(self) -> float:
        return self.params.collinearity_tolerance_deg

    def _turn_deg(self, n: int) -> float:
        a, b = sorted(self.graph.neighbors(n))
        pa, pn, pb = self.pos(a), self.pos(n), self.pos(b)
        v1 = (pn[0] - pa[0], pn[1] - pa[1])
        v2 = (pb[0] - pn[0], pb[1] - pn[1])
        norm = math.hypot(*v1) * math.hypot(*v2)
        cos = max(-1.0, min(1.0, (v1[0] * v2[0] + v1[1] * v2[1]) / norm))
        return math.degrees(math.acos(cos))

    def pos(self, node: int) -> tuple[float, float]:
        p = self.graph.nodes[node]["pos"]
        return (p.x, p.y)

    def position_of(self, node: int) -> Position:
        return self.graph.nodes[node]["pos"]

    def edge_cost(self, length_m: float, lanes: int) -> float:
        """Weighted cost with this graph's lane weights."""
        return edge_cost(length_m, lanes, self.weights)

    def street_of_edge(self, u: int, v: int) -> int:
        return self._edge_street[_key(u, v)]

    def streets_of_node(self, node: int) -> frozenset[int]:
        """Streets that end at ``node`` (empty for interior chain nodes)."""
        return frozenset(self._node_streets.get(node, ()))

    def project(self, pos: Position) -> Projection:
        """
        Project a position onto its nearest edge.

        Raises:
            RoadGraphError: If the graph has no edges
        """
        if not self._edges:
            raise RoadGraphError("Road graph is empty")
        p = np.array([pos.x, pos.y])
        d = self._seg_b - self._seg_a
        sq = np.einsum("ij,ij->i", d, d)
        t = np.clip(np.einsum("ij,ij->i", p - self._seg_a, d) / sq, 0.0, 1.0)
        points = self._seg_a + d * t[:, None]
        dist = np.hypot(points[:, 0] - p[0], points[:, 1] - p[1])
        k = int(np.argmin(dist))
        u, v = self._edges[k]
        return Projection(
            u=u,
            v=v,
            t=float(t[k]),
            point=Position(float(points[k, 0]), float(points[k, 1])),
            distance=float(dist[k]),
        )

    def nearest_junction(self, pos: Position) -> tuple[Junction, float] | None:
        if not self._junction_ids:
            return None
        dist = np.hypot(self._junction_xy[:, 0] - pos.x, self._junction_xy[:, 1] - pos.y)
        k = int(np.argmin(dist))
        return self.junctions[self._junction_ids[k]], float(dist[k])

    def classify_fp(self, pos: Position) -> FpClass:
        """FP1 inside a junction core, FP2 inside its ring, EDGE elsewhere."""
        found = self.nearest_junction(pos)
        if found is None:
            return FpClass.EDGE
        junction, dist = found
        if dist <= junction.fp1_radius:
            return FpClass.FP1
        if dist <= junction.fp2_radius:
            return FpClass.FP2
        return FpClass.EDGE

    def streets_at(self, pos: Position) -> frozenset[int]:
        """Streets stemming from where ``pos`` is: all legs of a junction, else its own street."""
        found = self.nearest_junction(pos)
        if found is not None and found[1] <= found[0].fp2_radius:
            return self.streets_of_node(found[0].node_id)
        proj = self.project(pos)
        return frozenset({self.street_of_edge(proj.u, proj.v)})

    def line_of_sight(self, a: Position, b: Position) -> bool:
        """
        Corner-mode reachability: same street, or the a-b corridor crosses the corner
        joining their streets within the junction's outer radius.
        """
        sa, sb = self.streets_at(a), self.streets_at(b)
        if sa & sb:
            return True
        margin = self.params.fp2_radius
        for sid in sorted(sa):
            for end in self.streets[sid].ends:
                if self.streets_of_node(end) & sb:
                    c = self.position_of(end)
                    if _segment_point_distance(a, b, c) <= margin:
                        return True
        return False

    def targets_for(self, dest: GeoArea) -> frozenset[int]:
        """Nodes inside ``dest``, else the single node nearest its center."""
        inside = frozenset(
            n for n in self.graph.nodes if dest.contains(self.graph.nodes[n]["pos"])
        )
        if inside:
            return inside
        center = dest.center
        nearest = min(
            self.graph.nodes,
            key=lambda n: (self.graph.nodes[n]["pos"].distance_to(center), n),
        )
        return frozenset({nearest})

    def shortest_path_to_area(self, from_pos: Position, dest: GeoArea) -> PathResult:
        """
        Minimum weighted cost from a position to a destination area.

        ``from_pos`` is projected onto its nearest edge and charged the weighted
        along-edge distance to either endpoint; the projection offset is free.

        Raises:
            RoadGraphError: If the graph is empty
        """
        if self.graph.number_of_nodes() == 0:
            raise RoadGraphError("Road graph is empty")
        routes = self._routes_to(dest)
        proj = self.project(from_pos)
        cost_uv = self.graph.edges[proj.u, proj.v]["cost"]
        candidates = []
        for node, along in ((proj.u, proj.t * cost_uv), (proj.v, (1.0 - proj.t) * cost_uv)):
            if node in routes.dist:
                candidates.append((along + routes.dist[node], node, along))
        if not candidates:
            return PathResult(cost=math.inf, next_hop_node=None, reachable=False)
        best = min(candidates, key=lambda c: (round(c[0] / _COST_EPS), c[1]))
        cost, node, along = best
        street = self._leaving_street(proj, node, along, routes)
        return PathResult(cost=cost, next_hop_node=node, reachable=True, street_id=street)

    def _leaving_street(
        self, proj: Projection, node: int, along: float, routes: _AreaRoutes
    ) -> int | None:
        at_node = along <= _COST_EPS
        junction = self.junctions.get(node)
        if junction is not None and proj.point.distance_to(junction.center) <= junction.fp2_radius:
            at_node = True
        if not at_node:
            return self.street_of_edge(proj.u, proj.v)
        nxt = routes.succ.get(node)
        if nxt is None:
            return None
        return self.street_of_edge(node, nxt)

    def _routes_to(self, dest: GeoArea) -> _AreaRoutes:
        cached = self._routes.get(dest.label)
        if cached is not None:
            return cached
        targets = self.targets_for(dest)
        dist: dict[int, float] = {t: 0.0 for t in targets}
        succ: dict[int, int] = {}
        heap = [(0.0, t) for t in sorted(targets)]
        heapq.heapify(heap)
        done: set[int] = set()
        while heap:
            d, node = heapq.heappop(heap)
            if node in done:
                continue
            done.add(node)
            for nb in sorted(self.graph.neighbors(node)):
                nd = d + self.graph.edges[node, nb]["cost"]
                old = dist.get(nb, math.inf)
                if nd < old - _COST_EPS:
                    dist[nb] = nd
                    succ[nb] = node
                    heapq.heappush(heap, (nd, nb))
                elif abs(nd - old) <= _COST_EPS and nb not in targets and node < succ[nb]:
                    succ[nb] = node
        routes = _AreaRoutes(dist=dist, succ=succ, targets=targets)
        self._routes[dest.label] = routes
        return routes

    def is_connected(self) -> bool:
        return self.graph.number_of_nodes() > 0 and nx.is_connected(self.graph)

    def bounds(self) -> tuple[Position, Position]:
        xy = np.array([self.pos(n) for n in self.graph.nodes], dtype=float)
        lo, hi = xy.min(axis=0), xy.max(axis=0)
        return Position(float(lo[0]), float(lo[1])), Position(float(hi[0]), float(hi[1]))

    def __len__(self) -> int:
        return self.graph.number_of_nodes()


def read_road_csv(path: Path, allowed_lanes: Iterable[int] = (2, 4, 6)) -> list[RoadSegment]:
    """
    Read ``node_a_x,node_a_y,node_b_x,node_b_y,lanes`` rows.

    Raises:
        RoadGraphError: On a bad header, unparsable row, unknown lane count or
            zero-length segment; the error names the 1-based data row
    """
    allowed = set(allowed_lanes)
    segments: list[RoadSegment] = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ROAD_CSV_HEADER:
            raise RoadGraphError(f"Road file header must be {','.join(ROAD_CSV_HEADER)}")
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(ROAD_CSV_HEADER):
                raise RoadGraphError(f"expected 5 fields, got {len(row)}", row=row_no)
            try:
                ax, ay, bx, by = (float(v) for v in row[:4])
                lanes = int(row[4])
            except ValueError as e:
                raise RoadGraphError(f"unparsable value ({e})", row=row_no) from None
            if lanes not in allowed:
                raise RoadGraphError(
                    f"invalid lane count {lanes} (allowed: {sorted(allowed)})", row=row_no
                )
            seg = RoadSegment(Position(ax, ay), Position(bx, by), lanes)
            if not seg.length > 0:
                raise RoadGraphError("zero-length segment", row=row_no)
            segments.append(seg)
    logger.debug(f"Read {len(segments)} road segments from {path}")
    return segments


def write_road_csv(path: Path, segments: Iterable[RoadSegment]) -> None:
    """Write segments in the road file format."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ROAD_CSV_HEADER)
        for seg in segments:
            writer.writerow([_fmt(seg.a.x), _fmt(seg.a.y), _fmt(seg.b.x), _fmt(seg.b.y), seg.lanes])


def _fmt(value: float) -> str:
    return f"{value:.3f}".rstrip("0").rstrip(".")


def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _segment_point_distance(a: Position, b: Position, c: Position) -> float:
    dx, dy = b.x - a.x, b.y - a.y
    sq = dx * dx + dy * dy
    if sq == 0:
        return a.distance_to(c)
    t = max(0.0, min(1.0, ((c.x - a.x) * dx + (c.y - a.y) * dy) / sq))
    return math.hypot(a.x + t * dx - c.x, a.y + t * dy - c.y)
