"""
Evaluation metrics computed from the event log alone.

Every function here is a pure pass over an ``EventLog``; ``compute_report`` on a log
reloaded from ``events.jsonl`` reproduces the report of the run that wrote it.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from navigo_core.core.models import SourceKind
from navigo_core.metrics.log import (
    FIB_WIDTH,
    FRAME_DROPPED,
    FRAME_SENT,
    INTEREST_EXPRESSED,
    INTEREST_SATISFIED,
    MALFORMED_FRAME,
    ORIGIN_REQUEST,
    QUEUE_DEPTH,
    SONG_FINISHED,
    EventLog,
)

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
QUEUE_SERIES_HEADER = ["t_ms", "node_id", "queue_depth"]
RTT_SERIES_HEADER = ["t_ms", "rtt_ms"]

_CACHE_KINDS = {SourceKind.RSU_CACHE.value, SourceKind.CAR_CACHE.value}


@dataclass
class MetricsReport:
    """
    Per-run evaluation summary.

    Ratios are None when their denominator is zero.

    Attributes:
        success_rate: Satisfied Interests over Interests expressed
        user_satisfaction: Songs played without a buffer underrun over songs judged
        channel_accesses_per_satisfied: Frames on the air per satisfied Interest
        infra_load: Origin requests per satisfied Interest
        infra_offload: Share of first-issue satisfactions served from a cache
        offload_mules_only: Same, counting car caches only
        mules_per_consumer: Histogram of distinct mules serving one listening session
        rtt_p95_ms: Nearest-rank 95th percentile of Interest-Data round trips
        max_faces_per_prefix: Widest FIB entry seen on any node
        queue_depth_series: (t_ms, node, depth) samples
    """

    success_rate: float | None = None
    user_satisfaction: float | None = None
    channel_accesses_per_satisfied: float | None = None
    infra_load: float | None = None
    infra_offload: float | None = None
    offload_mules_only: float | None = None
    mules_per_consumer: dict[str, int] = field(default_factory=dict)
    rtt_p95_ms: float | None = None
    rtt_p50_ms: float | None = None
    max_faces_per_prefix: int = 0
    interests_issued: int = 0
    interests_satisfied: int = 0
    songs_completed: int = 0
    songs_interrupted: int = 0
    frames_sent: int = 0
    frames_dropped: int = 0
    origin_requests: int = 0
    malformed_frames: int = 0
    mean_queue_depth: float = 0.0
    queue_depth_series: list[tuple[float, int, int]] = field(default_factory=list)
    rtt_series: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self, include_series: bool = False) -> dict[str, Any]:
        data = asdict(self)
        data["schema_version"] = REPORT_SCHEMA_VERSION
        if not include_series:
            data.pop("queue_depth_series")
            data.pop("rtt_series")
        return data

    def summary_items(self) -> list[tuple[str, Any]]:
        """Headline numbers in display order."""
        return [
            ("success_rate", self.success_rate),
            ("user_satisfaction", self.user_satisfaction),
            ("channel_accesses_per_satisfied", self.channel_accesses_per_satisfied),
            ("infra_load", self.infra_load),
            ("infra_offload", self.infra_offload),
            ("offload_mules_only", self.offload_mules_only),
            ("rtt_p95_ms", self.rtt_p95_ms),
            ("max_faces_per_prefix", self.max_faces_per_prefix),
            ("mean_queue_depth", self.mean_queue_depth),
        ]


def _ratio(num: float, den: float) -> float | None:
    return num / den if den else None


def success_rate(log: EventLog) -> float | None:
    return _ratio(log.count(INTEREST_SATISFIED), log.count(INTEREST_EXPRESSED))


def user_satisfaction(log: EventLog) -> float | None:
    """
    Songs played without an underrun over songs judged.

    A song that never played a chunk is not judged. Any other song is clean unless it
    underran, including one cut short by the end of the trip or of the run.
    """
    clean = judged = 0
    for e in log.of_kind(SONG_FINISHED):
        if e["underflow"]:
            judged += 1
        elif e["completed"] or e["chunks_played"] > 0:
            judged += 1
            clean += 1
    return _ratio(clean, judged)


def overhead(log: EventLog) -> float | None:
    """Interest and Data frames on the air per satisfied Interest, retransmissions included."""
    return _ratio(log.count(FRAME_SENT), log.count(INTEREST_SATISFIED))


def infra_load(log: EventLog) -> float | None:
    return _ratio(log.count(ORIGIN_REQUEST), log.count(INTEREST_SATISFIED))


def infra_offload(log: EventLog, mules_only: bool = False) -> float | None:
    """
    Share of first-issue satisfactions whose Data came from a cache.

    Re-issued Interests are left out. With ``mules_only`` only car caches count.
    """
    kinds = {SourceKind.CAR_CACHE.value} if mules_only else _CACHE_KINDS
    first = [e for e in log.of_kind(INTEREST_SATISFIED) if e["first_issue"]]
    hits = sum(1 for e in first if e["source_kind"] in kinds)
    return _ratio(hits, len(first))


def rtt_percentile(log: EventLog, p: float) -> float | None:
    """Nearest-rank percentile of satisfied RTTs in ms; None for an empty log."""
    values = sorted(float(e["rtt_ms"]) for e in log.of_kind(INTEREST_SATISFIED))
    return nearest_rank(values, p)


def nearest_rank(sorted_values: list[float], p: float) -> float | None:
    if not 0 < p <= 100:
        raise ValueError(f"Percentile must be in (0, 100], got {p}")
    if not sorted_values:
        return None
    rank = max(1, math.ceil(p / 100 * len(sorted_values)))
    return sorted_values[rank - 1]


def mules_histogram(log: EventLog) -> dict[str, int]:
    """
    For each listening session, the number of distinct cars whose caches served it.

    Returns:
        {"<mule count>": sessions}; sessions served only by the origin and RSUs count as 0
    """
    mules: dict[tuple[int, int], set[int]] = defaultdict(set)
    for e in log.of_kind(INTEREST_SATISFIED):
        key = (int(e["node"]), int(e["session"]))
        served = mules[key]
        if e["source_kind"] == SourceKind.CAR_CACHE.value:
            served.add(int(e["source_node"]))
    counts = Counter(len(s) for s in mules.values())
    return {str(k): counts[k] for k in sorted(counts)}


def compute_report(log: EventLog) -> MetricsReport:
    queue = [
        (e["t_us"] / 1000.0, int(e["node"]), int(e["depth"])) for e in log.of_kind(QUEUE_DEPTH)
    ]
    rtts = [(e["t_us"] / 1000.0, float(e["rtt_ms"])) for e in log.of_kind(INTEREST_SATISFIED)]
    songs = list(log.of_kind(SONG_FINISHED))
    widths = [int(e["max_faces"]) for e in log.of_kind(FIB_WIDTH)]
    return MetricsReport(
        success_rate=success_rate(log),
        user_satisfaction=user_satisfaction(log),
        channel_accesses_per_satisfied=overhead(log),
        infra_load=infra_load(log),
        infra_offload=infra_offload(log),
        offload_mules_only=infra_offload(log, mules_only=True),
        mules_per_consumer=mules_histogram(log),
        rtt_p95_ms=rtt_percentile(log, 95),
        rtt_p50_ms=rtt_percentile(log, 50),
        max_faces_per_prefix=max(widths, default=0),
        interests_issued=log.count(INTEREST_EXPRESSED),
        interests_satisfied=len(rtts),
        songs_completed=sum(1 for e in songs if e["completed"]),
        songs_interrupted=sum(1 for e in songs if e["underflow"]),
        frames_sent=log.count(FRAME_SENT),
        frames_dropped=log.count(FRAME_DROPPED),
        origin_requests=log.count(ORIGIN_REQUEST),
        malformed_frames=log.count(MALFORMED_FRAME),
        mean_queue_depth=sum(q[2] for q in queue) / len(queue) if queue else 0.0,
        queue_depth_series=queue,
        rtt_series=rtts,
    )


def write_report(
    report: MetricsReport, output_dir: Path, stem: str = "report", series: bool = True
) -> list[Path]:
    """
    Write ``<stem>.json`` plus, with ``series``, the queue-depth and RTT CSV series.

    Returns:
        Paths written
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    json_path = output_dir / f"{stem}.json"
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Report written to {json_path}")
    if not series:
        return [json_path]
    queue_path = output_dir / f"{stem}_queue_depth.csv"
    _write_csv(queue_path, QUEUE_SERIES_HEADER, report.queue_depth_series)
    rtt_path = output_dir / f"{stem}_rtt.csv"
    _write_csv(rtt_path, RTT_SERIES_HEADER, report.rtt_series)
    return [json_path, queue_path, rtt_path]


def load_report(path: Path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as f:
        data: dict[str, Any] = json.load(f)
    return data


def _write_csv(path: Path, header: list[str], rows: list[tuple[Any, ...]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.3f}" if isinstance(v, float) else v for v in row])
