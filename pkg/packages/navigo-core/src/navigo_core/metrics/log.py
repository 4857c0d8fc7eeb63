"""Append-only simulation event log, persisted as JSON Lines."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

INTEREST_EXPRESSED = "interest_expressed"
INTEREST_SATISFIED = "interest_satisfied"
FRAME_SENT = "frame_sent"
FRAME_DROPPED = "frame_dropped"
ORIGIN_REQUEST = "origin_request"
SONG_FINISHED = "song_finished"
MALFORMED_FRAME = "malformed_frame"
QUEUE_DEPTH = "queue_depth"
FIB_WIDTH = "fib_width"

EVENT_KINDS = frozenset(
    {
        INTEREST_EXPRESSED,
        INTEREST_SATISFIED,
        FRAME_SENT,
        FRAME_DROPPED,
        ORIGIN_REQUEST,
        SONG_FINISHED,
        MALFORMED_FRAME,
        QUEUE_DEPTH,
        FIB_WIDTH,
    }
)


class EventLog:
    """
    Ordered list of flat JSON-serializable records.

    Every record has ``t_us`` and ``kind``; the remaining keys depend on the kind.
    """

    def __init__(self, events: Iterable[dict[str, Any]] | None = None) -> None:
        self.events: list[dict[str, Any]] = list(events or [])

    def record(self, kind: str, t_us: int, **fields: Any) -> None:
        if kind not in EVENT_KINDS:
            raise ValueError(f"Unknown event kind: {kind}")
        self.events.append({"t_us": int(t_us), "kind": kind, **fields})

    def of_kind(self, kind: str) -> Iterator[dict[str, Any]]:
        return (e for e in self.events if e["kind"] == kind)

    def count(self, kind: str) -> int:
        return sum(1 for _ in self.of_kind(kind))

    def write_jsonl(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for event in self.events:
                f.write(json.dumps(event, sort_keys=True, ensure_ascii=False))
                f.write("\n")
        logger.info(f"Wrote {len(self.events)} events to {path}")

    def __len__(self) -> int:
        return len(self.events)


def load_event_log(path: Path) -> EventLog:
    """
    Read a log written by ``EventLog.write_jsonl``.

    Raises:
        ValueError: On a line that is not a JSON object with ``t_us`` and ``kind``
    """
    events = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{line_no}: invalid JSON ({e})") from e
            if not isinstance(event, dict) or "t_us" not in event or "kind" not in event:
                raise ValueError(f"{path}:{line_no}: not an event record")
            events.append(event)
    return EventLog(events)
