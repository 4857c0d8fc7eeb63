"""Tests for mobility trace loading and playback."""

import pytest

import navigo_core.sim.mobility as mobility
from navigo_core.core.errors import TraceError
from navigo_core.core.models import Position
from navigo_core.geo.road_graph import RoadGraph, RoadSegment
from navigo_core.sim.mobility import (
    MobilityTrace,
    TraceSample,
    load_trace,
    read_fcd_xml,
    read_trace_csv,
    write_trace_csv,
)

FCD = """<?xml version="1.0" encoding="UTF-8"?>
<fcd-export>
    <timestep time="0.00">
        <vehicle id="veh0" x="100.00" y="100.00" angle="90.00" speed="10.00" lane="e0_0"/>
    </timestep>
    <timestep time="1.00">
        <vehicle id="veh0" x="110.00" y="100.00" angle="90.00" speed="10.00" lane="e0_0"/>
        <vehicle id="veh1" x="500.00" y="100.00" angle="90.00" speed="0.00" lane="e0_0"/>
    </timestep>
</fcd-export>
"""


@pytest.fixture
def trace():
    return MobilityTrace(
        [
            TraceSample(0.0, "a", 0.0, 100.0),
            TraceSample(10.0, "a", 100.0, 100.0),
            TraceSample(2.0, "b", 50.0, 100.0),
            TraceSample(4.0, "b", 50.0, 140.0),
        ]
    )


class TestMobilityTrace:
    """Test interpolation and presence windows."""

    def test_linear_interpolation(self, trace):
        """Test that positions between samples are interpolated."""
        assert trace.position_at("a", 2.5) == Position(25.0, 100.0)
        assert trace.position_at("b", 3.0) == Position(50.0, 120.0)

    def test_absent_outside_window(self, trace):
        """Test that a vehicle exists only between its first and last samples."""
        assert trace.position_at("b", 1.9) is None
        assert trace.position_at("b", 4.1) is None
        assert trace.position_at("b", 4.0) == Position(50.0, 140.0)
        assert trace.window("a") == (0.0, 10.0)

    def test_vehicles_by_appearance(self, trace):
        """Test vehicle ordering."""
        assert trace.vehicles() == ["a", "b"]
        assert len(trace) == 2

    def test_unknown_vehicle(self, trace):
        """Test that querying an unknown vehicle raises."""
        with pytest.raises(TraceError, match="Unknown vehicle"):
            trace.position_at("zz", 1.0)

    def test_times_must_increase(self):
        """Test that repeated or decreasing sample times are rejected."""
        with pytest.raises(TraceError, match="strictly increasing"):
            MobilityTrace([TraceSample(1.0, "a", 0, 0), TraceSample(1.0, "a", 5, 0)])

    def test_non_finite_position_rejected(self):
        """Test that NaN coordinates are rejected."""
        with pytest.raises(TraceError):
            MobilityTrace([TraceSample(0.0, "a", float("nan"), 0)])

    def test_off_road_samples(self, trace):
        """Test that samples away from every road are reported."""
        graph = RoadGraph.build([RoadSegment(Position(0, 100), Position(200, 100), 2)])

        off = trace.off_road(graph, tolerance_m=5.0)

        assert off == [("b", 4.0, pytest.approx(40.0))]


class TestTraceFiles:
    """Test CSV and FCD ingestion."""

    def test_csv_round_trip(self, tmp_path, trace):
        """Test that a written trace reads back with the same playback."""
        path = tmp_path / "trace.csv"
        write_trace_csv(path, trace.samples())

        loaded = read_trace_csv(path)

        assert loaded.vehicles() == ["a", "b"]
        assert loaded.position_at("a", 5.0) == Position(50.0, 100.0)

    def test_csv_bad_header(self, tmp_path):
        """Test that a wrong header is rejected."""
        path = tmp_path / "trace.csv"
        path.write_text("t,id,x,y\n0,a,1,2\n", encoding="utf-8")

        with pytest.raises(TraceError, match="header"):
            read_trace_csv(path)

    def test_csv_error_names_row(self, tmp_path):
        """Test that an unparsable value names its row."""
        path = tmp_path / "trace.csv"
        path.write_text(
            "time_s,vehicle_id,x_m,y_m,speed_mps\n0,a,1,2,0\n1,a,east,2,0\n", encoding="utf-8"
        )

        with pytest.raises(TraceError, match="row 2"):
            read_trace_csv(path)

    def test_fcd_xml(self, tmp_path):
        """Test reading a floating-car-data export."""
        path = tmp_path / "fcd.xml"
        path.write_text(FCD, encoding="utf-8")

        loaded = read_fcd_xml(path)

        assert loaded.vehicles() == ["veh0", "veh1"]
        assert loaded.position_at("veh0", 0.5) == Position(105.0, 100.0)
        assert loaded.window("veh1") == (1.0, 1.0)

    def test_fcd_malformed(self, tmp_path):
        """Test that broken XML becomes a TraceError."""
        path = tmp_path / "fcd.xml"
        path.write_text("<fcd-export><timestep time='0'>", encoding="utf-8")

        with pytest.raises(TraceError):
            read_fcd_xml(path)

    def test_load_dispatches_on_suffix(self, tmp_path, mocker):
        """Test that .xml goes to the FCD reader and anything else to CSV."""
        xml = tmp_path / "fcd.xml"
        xml.write_text(FCD, encoding="utf-8")
        spy = mocker.spy(mobility, "read_fcd_xml")

        load_trace(xml)

        spy.assert_called_once_with(xml)

    def test_load_missing_file(self, tmp_path):
        """Test that a missing trace raises TraceError."""
        with pytest.raises(TraceError, match="not found"):
            load_trace(tmp_path / "nope.csv")
