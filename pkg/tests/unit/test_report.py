"""Tests for the event log and the metrics computed from it."""

import json

import pytest

from navigo_core.metrics.log import (
    FIB_WIDTH,
    FRAME_SENT,
    INTEREST_EXPRESSED,
    INTEREST_SATISFIED,
    ORIGIN_REQUEST,
    QUEUE_DEPTH,
    SONG_FINISHED,
    EventLog,
    load_event_log,
)
from navigo_core.metrics.report import (
    compute_report,
    infra_offload,
    mules_histogram,
    nearest_rank,
    user_satisfaction,
    write_report,
)


def satisfied(
    log, t_us, rtt_ms, source_kind="origin", source_node=-1, first=True, node=5, session=1
):
    log.record(
        INTEREST_SATISFIED,
        t_us,
        node=node,
        name="/provider/song0/chunk0",
        song=0,
        session=session,
        rtt_ms=rtt_ms,
        first_issue=first,
        source_kind=source_kind,
        source_node=source_node,
        packet_id=1,
    )


@pytest.fixture
def log():
    log = EventLog()
    for t in range(4):
        log.record(INTEREST_EXPRESSED, t, node=5, name="n", song=0, first_issue=True)
    satisfied(log, 10_000, 10.0)
    satisfied(log, 20_000, 20.0, source_kind="rsu_cache", source_node=0)
    satisfied(log, 30_000, 30.0, source_kind="car_cache", source_node=9, first=False)
    for t in range(6):
        log.record(FRAME_SENT, t, node=5, packet="interest", name="n", size=100)
    log.record(ORIGIN_REQUEST, 5, rsu=0, name="n")
    log.record(QUEUE_DEPTH, 100_000, node=5, depth=2)
    log.record(QUEUE_DEPTH, 200_000, node=5, depth=4)
    log.record(FIB_WIDTH, 0, node=5, max_faces=3)
    return log


class TestEventLog:
    """Test recording and persistence."""

    def test_unknown_kind_rejected(self):
        """Test that only known event kinds are recorded."""
        with pytest.raises(ValueError, match="Unknown event kind"):
            EventLog().record("nonsense", 0)

    def test_jsonl_round_trip(self, tmp_path, log):
        """Test that a written log reloads to the same records."""
        path = tmp_path / "events.jsonl"
        log.write_jsonl(path)

        assert load_event_log(path).events == log.events

    def test_load_rejects_bad_line(self, tmp_path):
        """Test that a corrupt line names its position."""
        path = tmp_path / "events.jsonl"
        path.write_text('{"t_us": 0, "kind": "frame_sent"}\n[1, 2]\n', encoding="utf-8")

        with pytest.raises(ValueError, match=":2:"):
            load_event_log(path)


class TestMetrics:
    """Test the individual metrics."""

    def test_headline_ratios(self, log):
        """Test success rate, overhead and infrastructure load."""
        report = compute_report(log)

        assert report.success_rate == pytest.approx(0.75)
        assert report.channel_accesses_per_satisfied == pytest.approx(2.0)
        assert report.infra_load == pytest.approx(1 / 3)
        assert report.max_faces_per_prefix == 3
        assert report.mean_queue_depth == pytest.approx(3.0)
        assert report.queue_depth_series == [(100.0, 5, 2), (200.0, 5, 4)]

    def test_offload_counts_first_issue_only(self, log):
        """Test that re-issued satisfactions are left out of the offload share."""
        assert infra_offload(log) == pytest.approx(0.5)
        assert infra_offload(log, mules_only=True) == pytest.approx(0.0)

    def test_empty_log_has_undefined_ratios(self):
        """Test that zero denominators give None instead of dividing."""
        report = compute_report(EventLog())

        assert report.success_rate is None
        assert report.user_satisfaction is None
        assert report.rtt_p95_ms is None
        assert report.frames_sent == 0

    def test_user_satisfaction(self):
        """Test that songs stopped before playing a chunk are not judged."""
        log = EventLog()
        for completed, underflow in [(True, False), (True, True), (False, True), (False, False)]:
            log.record(
                SONG_FINISHED,
                0,
                node=1,
                song=0,
                completed=completed,
                underflow=underflow,
                chunks_played=0,
            )

        assert user_satisfaction(log) == pytest.approx(1 / 3)

    def test_song_cut_short_after_playing_counts_clean(self):
        """Test that a song still playing when the run ends is judged by its underruns."""
        log = EventLog()
        for underflow in (False, False, True):
            log.record(
                SONG_FINISHED,
                0,
                node=1,
                song=0,
                completed=False,
                underflow=underflow,
                chunks_played=50,
            )

        assert user_satisfaction(log) == pytest.approx(2 / 3)

    def test_nearest_rank(self):
        """Test the nearest-rank percentile."""
        values = [float(v) for v in range(1, 21)]

        assert nearest_rank(values, 95) == 19.0
        assert nearest_rank(values, 100) == 20.0
        assert nearest_rank([7.0], 50) == 7.0
        assert nearest_rank([], 95) is None
        with pytest.raises(ValueError):
            nearest_rank(values, 0)

    def test_mules_histogram(self):
        """Test distinct car caches per listening session."""
        log = EventLog()
        satisfied(log, 0, 1.0, "car_cache", 10, session=1)
        satisfied(log, 0, 1.0, "car_cache", 11, session=1)
        satisfied(log, 0, 1.0, "car_cache", 10, session=1)
        satisfied(log, 0, 1.0, "origin", -1, session=2)

        assert mules_histogram(log) == {"0": 1, "2": 1}


class TestReportFiles:
    """Test report output."""

    def test_report_rebuilt_from_events(self, tmp_path, log):
        """Test that the report of a reloaded log matches the original."""
        log.write_jsonl(tmp_path / "events.jsonl")

        rebuilt = compute_report(load_event_log(tmp_path / "events.jsonl"))

        assert rebuilt.to_dict(include_series=True) == compute_report(log).to_dict(
            include_series=True
        )

    def test_write_report(self, tmp_path, log):
        """Test the JSON report and its series files."""
        paths = write_report(compute_report(log), tmp_path, stem="run")

        assert [p.name for p in paths] == ["run.json", "run_queue_depth.csv", "run_rtt.csv"]
        data = json.loads(paths[0].read_text(encoding="utf-8"))
        assert data["schema_version"] == 1
        assert "queue_depth_series" not in data
        rows = paths[1].read_text(encoding="utf-8").splitlines()
        assert rows[0] == "t_ms,node_id,queue_depth"
        assert rows[1] == "100.000,5,2"
