"""Tests for the road graph."""

import itertools
import math

import networkx as nx
import numpy as np
import pytest

from navigo_core.core.errors import RoadGraphError
from navigo_core.core.models import FpClass, Position
from navigo_core.geo.grid import GeoGrid
from navigo_core.geo.road_graph import (
    JunctionParams,
    LaneWeights,
    RoadGraph,
    RoadSegment,
    edge_cost,
    read_road_csv,
    write_road_csv,
)


def seg(ax, ay, bx, by, lanes=2):
    return RoadSegment(Position(ax, ay), Position(bx, by), lanes)


def lattice_segments(n=3, block=200.0, origin=100.0):
    segments = []
    for r in range(n):
        for c in range(n):
            x, y = origin + c * block, origin + r * block
            if c + 1 < n:
                segments.append(seg(x, y, x + block, y))
            if r + 1 < n:
                segments.append(seg(x, y, x, y + block))
    return segments


@pytest.fixture
def grid() -> GeoGrid:
    return GeoGrid()


@pytest.fixture
def lattice() -> RoadGraph:
    return RoadGraph.build(lattice_segments())


class TestBuild:
    """Test graph construction."""

    def test_single_street(self):
        """Test that one segment gives two nodes, one edge and no junctions."""
        graph = RoadGraph.build([seg(0, 0, 100, 0)])

        assert len(graph) == 2
        assert graph.graph.number_of_edges() == 1
        assert graph.junctions == {}

    def test_manhattan_3x3(self, lattice):
        """Test the 3x3 lattice: 9 nodes, 12 edges, 1 four-way and 4 three-way junctions."""
        degrees = sorted(lattice.graph.degree[n] for n in lattice.junctions)

        assert len(lattice) == 9
        assert lattice.graph.number_of_edges() == 12
        assert degrees == [3, 3, 3, 3, 4]

    def test_close_endpoints_merged(self):
        """Test that endpoints within 1 m share a node."""
        graph = RoadGraph.build([seg(0, 0, 100, 0), seg(100.5, 0, 200, 0)])

        assert len(graph) == 3
        assert graph.graph.number_of_edges() == 2

    def test_zero_length_segment_rejected(self):
        """Test that a segment collapsing to one node raises."""
        with pytest.raises(RoadGraphError):
            RoadGraph.build([seg(0, 0, 0.2, 0)])

    def test_unknown_lane_count_rejected(self):
        """Test that lane counts without a weight raise."""
        with pytest.raises(RoadGraphError):
            RoadGraph.build([seg(0, 0, 100, 0, lanes=3)])


class TestMergeLos:
    """Test line-of-sight street merging."""

    def test_collinear_segments_merge(self):
        """Test that two collinear 100 m segments form one 200 m street."""
        graph = RoadGraph.build([seg(0, 0, 100, 0), seg(100, 0, 200, 0)])

        assert len(graph.streets) == 1
        assert graph.streets[0].length == pytest.approx(200.0)

    def test_right_angle_splits(self):
        """Test that a 90 degree turn keeps two streets."""
        graph = RoadGraph.build([seg(0, 0, 100, 0), seg(100, 0, 100, 100)])

        assert len(graph.streets) == 2

    def test_gentle_zigzag_merges(self):
        """Test that 10 degree bends under a 15 degree tolerance stay one street."""
        angle = math.radians(10)
        p2 = (100 + 100 * math.cos(angle), 100 * math.sin(angle))
        graph = RoadGraph.build(
            [seg(0, 0, 100, 0), seg(100, 0, *p2), seg(*p2, p2[0] + 100, p2[1])]
        )

        assert len(graph.streets) == 1
        assert len(graph.streets[0].nodes) == 4

    def test_street_cost_is_sum_of_members(self):
        """Test that merged street cost adds member costs."""
        graph = RoadGraph.build([seg(0, 0, 100, 0, lanes=6), seg(100, 0, 300, 0, lanes=6)])

        assert graph.streets[0].cost == pytest.approx(75.0)

    def test_every_edge_in_one_street(self, lattice):
        """Test that streets partition the edge set."""
        edges = [
            (a, b) for s in lattice.streets for a, b in zip(s.nodes, s.nodes[1:])
        ]

        assert len(edges) == lattice.graph.number_of_edges()
        for a, b in lattice.graph.edges:
            assert lattice.street_of_edge(a, b) is not None


class TestEdgeCost:
    """Test lane-weighted costs."""

    def test_two_lanes(self):
        """Test 100 m on 2 lanes costs 100."""
        assert edge_cost(100.0, 2) == 100.0

    def test_six_lanes(self):
        """Test 100 m on 6 lanes costs 25."""
        assert edge_cost(100.0, 6) == 25.0

    def test_zero_length_rejected(self):
        """Test that a zero length raises."""
        with pytest.raises(RoadGraphError):
            edge_cost(0.0, 2)

    def test_increasing_weights_rejected(self):
        """Test that wider roads may not cost more."""
        with pytest.raises(RoadGraphError):
            LaneWeights({2: 0.5, 4: 0.9})


class TestShortestPath:
    """Test the area-targeted Dijkstra."""

    def test_prefers_wide_road(self, grid):
        """Test 500 m on 6 lanes (cost 125) beats 400 m on 2 lanes (cost 400)."""
        graph = RoadGraph.build(
            [
                seg(100, 100, 500, 100, lanes=2),
                seg(100, 100, 300, 250, lanes=6),
                seg(300, 250, 500, 100, lanes=6),
            ]
        )
        dest = grid.area_of(Position(500, 100))

        result = graph.shortest_path_to_area(Position(100, 100), dest)

        assert result.reachable
        assert result.cost == pytest.approx(125.0)
        assert result.next_hop_node == 0
        assert result.street_id == graph.street_of_edge(0, 2)

    def test_inside_destination(self, grid):
        """Test that a position at a node inside the destination costs nothing."""
        graph = RoadGraph.build([seg(100, 100, 500, 100)])
        dest = grid.area_of(Position(100, 100))

        result = graph.shortest_path_to_area(Position(100, 100), dest)

        assert result.cost == 0.0
        assert result.next_hop_node == 0
        assert result.street_id is None

    def test_projection_charges_along_edge(self, grid):
        """Test that a mid-block start pays the weighted distance to the node."""
        graph = RoadGraph.build([seg(100, 100, 500, 100)])
        dest = grid.area_of(Position(500, 100))

        result = graph.shortest_path_to_area(Position(250, 110), dest)

        assert result.cost == pytest.approx(250.0)

    def test_disconnected_target(self, grid):
        """Test that an unreachable area reports reachable=False."""
        graph = RoadGraph.build([seg(100, 100, 300, 100), seg(100, 900, 300, 900)])
        dest = grid.area_of(Position(100, 900))

        result = graph.shortest_path_to_area(Position(100, 100), dest)

        assert not result.reachable
        assert result.cost == math.inf
        assert result.next_hop_node is None

    def test_area_without_nodes_uses_nearest_node(self, grid):
        """Test that an empty destination cell targets the node closest to its center."""
        graph = RoadGraph.build([seg(100, 100, 500, 100)])
        dest = grid.area_of(Position(1500, 1500))

        assert graph.targets_for(dest) == frozenset({1})

    def test_matches_exhaustive_enumeration(self, grid):
        """Test Dijkstra costs equal brute-force path enumeration on small random graphs."""
        rng = np.random.default_rng(11)
        candidates = lattice_segments()
        for _ in range(25):
            picks = rng.choice(len(candidates), size=int(rng.integers(4, 10)), replace=False)
            segments = [
                RoadSegment(candidates[i].a, candidates[i].b, int(rng.choice([2, 4, 6])))
                for i in sorted(picks)
            ]
            graph = RoadGraph.build(segments)
            g = graph.graph
            for target, source in itertools.product(g.nodes, g.nodes):
                dest = grid.area_of(graph.position_of(target))
                if source == target:
                    best = 0.0
                elif nx.has_path(g, source, target):
                    best = min(
                        sum(g.edges[a, b]["cost"] for a, b in zip(p, p[1:]))
                        for p in nx.all_simple_paths(g, source, target)
                    )
                else:
                    best = math.inf
                result = graph.shortest_path_to_area(graph.position_of(source), dest)
                assert result.cost == pytest.approx(best)

    def test_empty_graph_raises(self, grid):
        """Test that querying an empty graph raises."""
        graph = RoadGraph(nx.Graph(), JunctionParams(), LaneWeights())

        with pytest.raises(RoadGraphError):
            graph.shortest_path_to_area(Position(0, 0), grid.area_of(Position(0, 0)))


class TestJunctionGeometry:
    """Test forwarding-point classification and line of sight."""

    def test_junction_center_is_fp1(self, lattice):
        """Test a position at the junction center is FP1."""
        assert lattice.classify_fp(Position(300, 300)) is FpClass.FP1

    def test_ring_is_fp2(self, lattice):
        """Test a position halfway between the radii is FP2."""
        assert lattice.classify_fp(Position(320, 300)) is FpClass.FP2

    def test_mid_block_is_edge(self, lattice):
        """Test a mid-block position is EDGE."""
        assert lattice.classify_fp(Position(200, 300)) is FpClass.EDGE

    def test_no_junctions_means_edge(self):
        """Test that a graph without junctions classifies everything as EDGE."""
        graph = RoadGraph.build([seg(0, 0, 100, 0)])

        assert graph.classify_fp(Position(0, 0)) is FpClass.EDGE

    def test_same_street_in_sight(self, lattice):
        """Test that two points on one street see each other."""
        assert lattice.line_of_sight(Position(150, 300), Position(250, 300))

    def test_close_corner_in_sight(self, lattice):
        """Test that a short hop around a corner is allowed."""
        assert lattice.line_of_sight(Position(260, 100), Position(300, 140))

    def test_building_blocks_far_corner(self, lattice):
        """Test that a diagonal across a block is blocked."""
        assert not lattice.line_of_sight(Position(200, 100), Position(300, 200))

    def test_line_of_sight_is_symmetric(self, lattice):
        """Test a-b and b-a agree."""
        rng = np.random.default_rng(2)
        for _ in range(200):
            pts = []
            for _ in range(2):
                proj = lattice.project(Position(*rng.uniform(100, 500, size=2)))
                pts.append(proj.point)
            assert lattice.line_of_sight(pts[0], pts[1]) == lattice.line_of_sight(pts[1], pts[0])


class TestRoadCsv:
    """Test the road file format."""

    def test_write_then_read(self, tmp_path):
        """Test that written segments are read back unchanged."""
        path = tmp_path / "roads.csv"
        segments = [seg(0, 0, 100.5, 0, lanes=4), seg(100.5, 0, 100.5, 80, lanes=6)]

        write_road_csv(path, segments)

        assert read_road_csv(path) == segments

    def test_bad_lane_count_names_row(self, tmp_path):
        """Test that an invalid lane count reports its data row."""
        path = tmp_path / "roads.csv"
        path.write_text(
            "node_a_x,node_a_y,node_b_x,node_b_y,lanes\n0,0,100,0,2\n100,0,200,0,3\n",
            encoding="utf-8",
        )

        with pytest.raises(RoadGraphError, match="row 2") as exc:
            read_road_csv(path)
        assert exc.value.row == 2

    def test_bad_header(self, tmp_path):
        """Test that a wrong header is rejected."""
        path = tmp_path / "roads.csv"
        path.write_text("x1,y1,x2,y2,lanes\n", encoding="utf-8")

        with pytest.raises(RoadGraphError):
            read_road_csv(path)

    def test_unparsable_value(self, tmp_path):
        """Test that a non-numeric coordinate names its row."""
        path = tmp_path / "roads.csv"
        path.write_text(
            "node_a_x,node_a_y,node_b_x,node_b_y,lanes\nabc,0,100,0,2\n", encoding="utf-8"
        )

        with pytest.raises(RoadGraphError, match="row 1"):
            read_road_csv(path)
