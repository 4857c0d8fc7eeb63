"""Deterministic future event set with cancellable events."""

from __future__ import annotations

import heapq
import logging
from collections.abc import Callable
from typing import Any

from navigo_core.core.interfaces import Cancellable, EventScheduler

logger = logging.getLogger(__name__)

US_PER_MS = 1_000
US_PER_S = 1_000_000


def ms_to_us(ms: float) -> int:
    return int(round(ms * US_PER_MS))


def s_to_us(s: float) -> int:
    return int(round(s * US_PER_S))


class SimEvent(Cancellable):
    """
    One scheduled callback.

    Events order by (fire_time, sequence); the sequence is unique per scheduler so
    the ordering is total.
    """

    __slots__ = ("fire_time", "sequence", "action", "args", "_cancelled")

    def __init__(
        self, fire_time: int, sequence: int, action: Callable[..., Any], args: tuple[Any, ...]
    ) -> None:
        self.fire_time = fire_time
        self.sequence = sequence
        self.action = action
        self.args = args
        self._cancelled = False

    def cancel(self) -> None:
        self._cancelled = True

    @property
    def cancelled(self) -> bool:
        return self._cancelled

    def __lt__(self, other: SimEvent) -> bool:
        return (self.fire_time, self.sequence) < (other.fire_time, other.sequence)

    def __repr__(self) -> str:
        name = getattr(self.action, "__qualname__", repr(self.action))
        return f"SimEvent(t={self.fire_time}, seq={self.sequence}, {name})"


class Scheduler(EventScheduler):
    """Single-threaded event loop over integer microseconds."""

    def __init__(self) -> None:
        self._queue: list[SimEvent] = []
        self._now = 0
        self._sequence = 0
        self.executed = 0

    @property
    def now(self) -> int:
        return self._now

    def schedule(self, delay_us: int, action: Callable[..., Any], *args: Any) -> SimEvent:
        if delay_us < 0:
            raise ValueError(f"Cannot schedule {delay_us} us in the past")
        return self.schedule_at(self._now + int(delay_us), action, *args)

    def schedule_at(self, fire_time: int, action: Callable[..., Any], *args: Any) -> SimEvent:
        """Schedule at an absolute time, which must not be in the past."""
        if fire_time < self._now:
            raise ValueError(f"Event at {fire_time} is before now ({self._now})")
        event = SimEvent(int(fire_time), self._sequence, action, args)
        self._sequence += 1
        heapq.heappush(self._queue, event)
        return event

    def run(self, until: int) -> None:
        """Execute every event with fire_time <= ``until``, then park the clock there."""
        while self._queue and self._queue[0].fire_time <= until:
            event = heapq.heappop(self._queue)
            if event.cancelled:
                continue
            self._now = event.fire_time
            event.action(*event.args)
            self.executed += 1
        self._now = max(self._now, until)
        logger.debug(f"Scheduler stopped at {self._now} us after {self.executed} events")

    def pending(self) -> int:
        return sum(1 for e in self._queue if not e.cancelled)
