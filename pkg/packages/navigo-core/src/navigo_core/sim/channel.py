"""Shared broadcast medium: unit-disk range, corner blocking, airtime and collisions."""

from __future__ import annotations

import logging
import math
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from navigo_core.core.config_service import RadioConfig
from navigo_core.core.interfaces import EventScheduler
from navigo_core.core.models import Position
from navigo_core.geo.road_graph import RoadGraph
from navigo_core.lal.header import Frame
from navigo_core.metrics.log import FRAME_DROPPED, FRAME_SENT, EventLog

logger = logging.getLogger(__name__)

PositionFn = Callable[[], Position | None]
ReceiveFn = Callable[[Frame], None]


@dataclass
class Reception:
    """One frame arriving at one receiver; ``corrupted`` once anything overlaps it."""

    frame: Frame
    start: int
    end: int
    corrupted: bool = False


@dataclass
class _Station:
    node_id: int
    position: PositionFn
    receive: ReceiveFn
    queue: deque[Frame] = field(default_factory=deque)
    busy_until: int = 0
    transmitting: bool = False
    receptions: list[Reception] = field(default_factory=list)


class BroadcastChannel:
    """
    Every station shares one channel.

    A frame handed to ``enqueue`` waits in the sender's MAC FIFO, goes on the air for
    ``size * 8 / bitrate`` and reaches every station within range (and in line of sight
    in corner mode) when its airtime ends. Receivers are fixed when the transmission
    starts. In destructive mode overlapping receptions at one station are all lost.
    """

    def __init__(
        self,
        scheduler: EventScheduler,
        graph: RoadGraph,
        config: RadioConfig,
        log: EventLog | None = None,
    ) -> None:
        self.scheduler = scheduler
        self.graph = graph
        self.config = config
        self.log = log
        self._stations: dict[int, _Station] = {}
        self.collisions = 0
        self.dropped = 0
        self.delivered = 0

    def attach(self, node_id: int, position: PositionFn, receive: ReceiveFn) -> None:
        if node_id in self._stations:
            raise ValueError(f"Node {node_id} already attached")
        self._stations[node_id] = _Station(node_id, position, receive)

    def tx_duration(self, size_bytes: int) -> int:
        """Airtime in microseconds, rounded up."""
        return math.ceil(size_bytes * 8 * 1_000_000 / self.config.bitrate_bps)

    def queue_depth(self, node_id: int) -> int:
        """Frames waiting in the MAC queue, not counting one already on the air."""
        return len(self._stations[node_id].queue)

    def reachable(self, a: Position, b: Position) -> bool:
        """Symmetric link test between two positions."""
        if a.distance_to(b) > self.config.range_m:
            return False
        return not self.config.corner_mode or self.graph.line_of_sight(a, b)

    def enqueue(self, frame: Frame) -> bool:
        """
        Queue a frame at its sender's MAC.

        Returns:
            False if the queue is at the drop threshold and the frame was discarded
        """
        station = self._stations[frame.sender]
        if len(station.queue) >= self.config.drop_threshold:
            self.dropped += 1
            if self.log is not None:
                self.log.record(
                    FRAME_DROPPED,
                    self.scheduler.now,
                    node=frame.sender,
                    packet=frame.kind.value,
                    name=str(frame.packet.name),
                )
            logger.debug(f"node {frame.sender}: MAC queue full, frame dropped")
            return False
        station.queue.append(frame)
        if not station.transmitting:
            self._start_next(station)
        return True

    def neighbours(self, node_id: int) -> list[int]:
        """Stations that would receive a frame sent by ``node_id`` now."""
        sender = self._stations[node_id]
        me = sender.position()
        if me is None:
            return []
        return [s.node_id for s in self._receivers(sender, me)]

    # ---- internals ----

    def _start_next(self, station: _Station) -> None:
        if not station.queue:
            station.transmitting = False
            return
        now = self.scheduler.now
        if self.config.carrier_sense:
            idle_at = max((r.end for r in station.receptions if r.end > now), default=now)
            if idle_at > now:
                station.transmitting = True
                self.scheduler.schedule(idle_at - now, self._transmit, station)
                return
        self._transmit(station)

    def _transmit(self, station: _Station) -> None:
        now = self.scheduler.now
        frame = station.queue.popleft()
        station.transmitting = True
        duration = self.tx_duration(frame.size)
        station.busy_until = now + duration
        sender_pos = station.position()
        if self.log is not None:
            self.log.record(
                FRAME_SENT,
                now,
                node=station.node_id,
                packet=frame.kind.value,
                name=str(frame.packet.name),
                size=frame.size,
            )
        if sender_pos is not None:
            for receiver in self._receivers(station, sender_pos):
                reception = Reception(frame, now, now + duration)
                self._begin_reception(receiver, reception)
                self.scheduler.schedule(duration, self._deliver, receiver, reception)
        else:
            logger.debug(f"node {station.node_id}: left the map, frame lost on the air")
        self.scheduler.schedule(duration, self._start_next, station)

    def _receivers(self, sender: _Station, at: Position) -> list[_Station]:
        others = []
        positions = []
        for node_id in sorted(self._stations):
            if node_id == sender.node_id:
                continue
            station = self._stations[node_id]
            pos = station.position()
            if pos is not None:
                others.append(station)
                positions.append((pos.x, pos.y))
        if not others:
            return []
        xy = np.asarray(positions, dtype=float)
        dist = np.hypot(xy[:, 0] - at.x, xy[:, 1] - at.y)
        in_range = np.flatnonzero(dist <= self.config.range_m)
        result = []
        for index in in_range:
            station = others[int(index)]
            if self.config.corner_mode:
                there = Position(float(xy[index, 0]), float(xy[index, 1]))
                if not self.graph.line_of_sight(at, there):
                    continue
            result.append(station)
        return result

    def _begin_reception(self, station: _Station, reception: Reception) -> None:
        now = reception.start
        station.receptions = [r for r in station.receptions if r.end > now]
        if self.config.collision_mode == "destructive" and station.receptions:
            for r in [*station.receptions, reception]:
                if not r.corrupted:
                    r.corrupted = True
                    self.collisions += 1
        station.receptions.append(reception)

    def _deliver(self, station: _Station, reception: Reception) -> None:
        if reception.corrupted:
            logger.debug(
                f"node {station.node_id}: collision, frame from {reception.frame.sender} lost"
            )
            return
        if station.position() is None:
            return
        self.delivered += 1
        station.receive(reception.frame)
