"""Tests for the streaming session and consumer application."""

import numpy as np
import pytest

from navigo_core.core.models import APP_FACE
from navigo_core.metrics.log import (
    INTEREST_EXPRESSED,
    INTEREST_SATISFIED,
    SONG_FINISHED,
    EventLog,
)
from navigo_core.sim.events import Scheduler
from navigo_core.workload.catalog import Catalog
from navigo_core.workload.session import (
    ConsumerApp,
    DataArrived,
    PlaybackTick,
    StreamSession,
    Timeout,
    window_chunks,
)


@pytest.fixture
def session():
    return StreamSession(song=0, chunks=10, chunk_ms=100.0, pipeline_limit=3, buffer_ms=500.0)


class TestStreamSession:
    """Test the per-song state machine."""

    def test_start_fills_pipeline(self, session):
        """Test that the first requests stop at the pipeline limit."""
        assert session.start().request == [0, 1, 2]

    def test_buffer_bounds_requests(self):
        """Test that requests stop at the buffer horizon."""
        session = StreamSession(0, 10, chunk_ms=100.0, pipeline_limit=20, buffer_ms=300.0)

        assert session.start().request == [0, 1, 2]

    def test_first_chunk_starts_playback(self, session):
        """Test that chunk 0 starts playback and frees a slot."""
        session.start()

        actions = session.step(DataArrived(0))

        assert actions.start_playback
        assert actions.request == [3]

    def test_out_of_order_does_not_start(self, session):
        """Test that a later chunk alone does not start playback."""
        session.start()

        actions = session.step(DataArrived(1))

        assert not actions.start_playback
        assert not session.playing

    def test_underflow_flagged_once(self, session):
        """Test that underruns pause playback and raise the flag only once."""
        session.start()
        session.step(DataArrived(0))
        session.step(DataArrived(1))

        assert session.step(PlaybackTick()).start_playback
        stalled = session.step(PlaybackTick())
        assert stalled.underflow
        assert not session.playing

        resumed = session.step(DataArrived(2))
        assert resumed.start_playback
        session.step(PlaybackTick())
        again = session.step(PlaybackTick())
        assert not again.underflow
        assert session.underflows == 2
        assert session.underflow_flag

    def test_tick_while_paused_is_ignored(self, session):
        """Test that a stray tick does nothing before playback."""
        session.start()

        assert session.step(PlaybackTick()).request == []
        assert session.current_chunk == 0

    def test_timeout_reexpresses_pending(self, session):
        """Test that only still-pending chunks are re-expressed."""
        session.start()
        session.step(DataArrived(0))

        assert session.step(Timeout(1)).reexpress == [1]
        assert session.step(Timeout(0)).reexpress == []

    def test_duplicate_data_ignored(self, session):
        """Test that Data for a chunk not pending changes nothing."""
        session.start()
        session.step(DataArrived(0))

        assert session.step(DataArrived(0)).request == []

    def test_finishes_after_last_chunk(self):
        """Test that playing the last chunk finishes the song."""
        session = StreamSession(0, 2, chunk_ms=100.0)
        session.start()
        session.step(DataArrived(0))
        session.step(DataArrived(1))
        session.step(PlaybackTick())

        assert session.step(PlaybackTick()).finished
        assert session.finished
        assert session.step(DataArrived(1)).finished

    def test_window_chunks(self):
        """Test the buffer size in chunks."""
        assert window_chunks(30_000.0, 180_000.0 / 1700) == 283
        assert window_chunks(500.0, 100.0) == 5


class TestConsumerApp:
    """Test the application on top of a mocked forwarder."""

    @pytest.fixture
    def catalog(self):
        return Catalog(n_songs=5, chunks_per_song=2, payload_bytes=100)

    @pytest.fixture
    def forwarder(self, mocker):
        return mocker.Mock()

    @pytest.fixture
    def scheduler(self):
        return Scheduler()

    @pytest.fixture
    def log(self):
        return EventLog()

    @pytest.fixture
    def app(self, forwarder, scheduler, catalog, log):
        return ConsumerApp(
            node_id=7,
            forwarder=forwarder,
            scheduler=scheduler,
            rng=np.random.default_rng(0),
            catalog=catalog,
            popularity=None,
            timeout_ms=1_000.0,
            pipeline_limit=20,
            buffer_ms=30_000.0,
            chunk_ms=100.0,
            log=log,
            playlist=[3],
        )

    def expressed(self, forwarder):
        return [str(call.args[0].name) for call in forwarder.on_interest.call_args_list]

    def test_start_expresses_on_app_face(self, app, forwarder, log):
        """Test that starting a song sends its first Interests through the app face."""
        app.start()

        assert self.expressed(forwarder) == ["/provider/song3/chunk0", "/provider/song3/chunk1"]
        assert all(call.args[1] == APP_FACE for call in forwarder.on_interest.call_args_list)
        assert log.count(INTEREST_EXPRESSED) == 2
        interest = forwarder.on_interest.call_args.args[0]
        assert str(interest.routable_prefix) == "/provider/song3"

    def test_data_logged_with_rtt(self, app, catalog, scheduler, log):
        """Test that satisfied Interests are logged with their round-trip time."""
        app.start()
        scheduler.run(40_000)

        app.on_data(catalog.make_data(catalog.chunk_name(3, 0)))

        (event,) = log.of_kind(INTEREST_SATISFIED)
        assert event["rtt_ms"] == pytest.approx(40.0)
        assert event["first_issue"]
        assert event["source_kind"] == "origin"

    def test_timeout_withdraws_and_reexpresses(self, app, forwarder, catalog, scheduler, log):
        """Test that the application timeout withdraws the PIT record and asks again."""
        app.start()

        scheduler.run(1_000_000)

        forwarder.withdraw.assert_any_call(catalog.chunk_name(3, 0), APP_FACE)
        assert forwarder.on_interest.call_count == 4
        nonces = {call.args[0].nonce for call in forwarder.on_interest.call_args_list}
        assert len(nonces) == 4

    def test_reexpressed_rtt_from_last_issue(self, app, catalog, scheduler, log):
        """Test that a retried chunk measures RTT from its latest expression."""
        app.start()
        scheduler.run(1_020_000)

        app.on_data(catalog.make_data(catalog.chunk_name(3, 0)))

        (event,) = log.of_kind(INTEREST_SATISFIED)
        assert event["rtt_ms"] == pytest.approx(20.0)
        assert not event["first_issue"]

    def test_song_completes_and_playlist_ends(self, app, catalog, scheduler, log):
        """Test that a fully played song is logged complete and the app goes quiet."""
        app.start()
        app.on_data(catalog.make_data(catalog.chunk_name(3, 0)))
        app.on_data(catalog.make_data(catalog.chunk_name(3, 1)))

        scheduler.run(500_000)

        (event,) = log.of_kind(SONG_FINISHED)
        assert event["completed"]
        assert not event["underflow"]
        assert not app.active

    def test_stop_mid_song(self, app, log):
        """Test that stopping ends the song unfinished."""
        app.start()

        app.stop()

        (event,) = log.of_kind(SONG_FINISHED)
        assert not event["completed"]
        assert app.session is None

    def test_other_song_data_ignored(self, app, catalog, log):
        """Test that Data for another song is not counted."""
        app.start()

        app.on_data(catalog.make_data(catalog.chunk_name(1, 0)))

        assert log.count(INTEREST_SATISFIED) == 0
