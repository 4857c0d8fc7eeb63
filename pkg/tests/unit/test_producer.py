"""Tests for the origin server and consumer prebinding."""

import pytest

from navigo_core.core.config_service import RsuConfig
from navigo_core.core.errors import LabelParseError
from navigo_core.core.models import Interest, Name, SourceKind
from navigo_core.geo.grid import GeoGrid
from navigo_core.metrics.log import ORIGIN_REQUEST, EventLog
from navigo_core.ndn.tables import Fib
from navigo_core.sim.events import Scheduler
from navigo_core.sim.runner import ORIGIN_NODE_ID
from navigo_core.workload.catalog import Catalog
from navigo_core.workload.producer import OriginServer, consumer_prebind

PREFIX = Name.parse("/provider/song1")


@pytest.fixture
def catalog():
    return Catalog(n_songs=5, chunks_per_song=4, payload_bytes=1024)


@pytest.fixture
def scheduler():
    return Scheduler()


@pytest.fixture
def log():
    return EventLog()


@pytest.fixture
def origin(catalog, scheduler, log):
    ids = iter(range(100, 200))
    return OriginServer(ORIGIN_NODE_ID, catalog, scheduler, lambda: next(ids), log)


@pytest.fixture
def delivered(origin):
    received = []
    origin.attach_rsu(0, RsuConfig("rsu0", 0.0, 0.0, 20.0, 8e6), received.append)
    return received


class TestOriginServer:
    """Test backhaul replies."""

    def test_reply_after_latency_and_serialization(
        self, origin, delivered, catalog, scheduler
    ):
        """Test that a reply takes the link latency plus its serialization time."""
        name = catalog.chunk_name(1, 0)
        wire = catalog.make_data(name).wire_size

        assert origin.request(0, Interest(name, 1))
        scheduler.run(20_000 + wire - 1)
        assert delivered == []

        scheduler.run(20_000 + wire)
        (data,) = delivered
        assert data.name == name
        assert data.routable_prefix == PREFIX
        assert data.lineage.source_kind is SourceKind.ORIGIN
        assert data.lineage.source_node == ORIGIN_NODE_ID
        assert data.lineage.packet_id == 100

    def test_replies_share_the_link(self, origin, delivered, catalog, scheduler):
        """Test that back-to-back replies are serialized one after the other."""
        first, second = catalog.chunk_name(1, 0), catalog.chunk_name(1, 1)
        wire = catalog.make_data(first).wire_size
        origin.request(0, Interest(first, 1))
        origin.request(0, Interest(second, 2))

        scheduler.run(20_000 + wire)
        assert [d.name for d in delivered] == [first]

        scheduler.run(20_000 + 2 * wire)
        assert [d.name for d in delivered] == [first, second]

    def test_every_request_logged(self, origin, delivered, catalog, log):
        """Test that duplicate requests are each counted."""
        name = catalog.chunk_name(1, 0)
        origin.request(0, Interest(name, 1))
        origin.request(0, Interest(name, 2))

        assert log.count(ORIGIN_REQUEST) == 2
        assert origin.requests == 2

    def test_unknown_name_unanswered(self, origin, delivered, scheduler, log):
        """Test that a name outside the catalog is logged but gets no Data."""
        assert origin.request(0, Interest(Name.parse("/provider/song9/chunk0"), 1))
        scheduler.run(10_000_000)

        assert delivered == []
        assert log.count(ORIGIN_REQUEST) == 1

    def test_rsu_without_link(self, origin, catalog):
        """Test that an unattached RSU is refused."""
        assert not origin.request(3, Interest(catalog.chunk_name(1, 0), 1))


class TestConsumerPrebind:
    """Test location-dependent binding."""

    def test_binds_prefix_to_area_face(self, mocker):
        """Test that the prefix is bound to the GeoFace of the given area."""
        fib = Fib()
        lal = mocker.Mock(grid=GeoGrid(), node_id=4)
        lal.get_or_create_geoface.return_value = 256

        face = consumer_prebind(fib, lal, PREFIX, "11SLT 003 004")

        assert face == 256
        assert fib.faces_of(PREFIX) == [256]
        lal.get_or_create_geoface.assert_called_once_with("11SLT 003 004")

    def test_bad_label_rejected(self, mocker):
        """Test that a malformed area label binds nothing."""
        fib = Fib()
        lal = mocker.Mock(grid=GeoGrid(), node_id=4)

        with pytest.raises(LabelParseError):
            consumer_prebind(fib, lal, PREFIX, "11SLT 3 004")

        assert len(fib) == 0
