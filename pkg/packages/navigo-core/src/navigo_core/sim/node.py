"""Simulated vehicle or RSU: NDN forwarder, strategy and LAL wired to the channel."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import replace
from enum import Enum

import numpy as np

from navigo_core.core.config_service import ScenarioConfig
from navigo_core.core.interfaces import EventScheduler, FaceDispatcher
from navigo_core.core.models import (
    APP_FACE,
    BACKHAUL_FACE,
    Data,
    Interest,
    Lineage,
    Position,
    SourceKind,
)
from navigo_core.geo.grid import GeoGrid
from navigo_core.geo.road_graph import RoadGraph
from navigo_core.lal.header import Frame
from navigo_core.lal.layer import LinkAdaptationLayer
from navigo_core.metrics.log import FIB_WIDTH, EventLog
from navigo_core.ndn.forwarder import Forwarder
from navigo_core.ndn.tables import ContentStore, Fib, Pit
from navigo_core.sim.channel import BroadcastChannel
from navigo_core.sim.events import ms_to_us
from navigo_core.strategies.registry import build_strategy
from navigo_core.workload.producer import OriginServer
from navigo_core.workload.session import ConsumerApp

logger = logging.getLogger(__name__)


class NodeKind(Enum):
    VEHICLE = "vehicle"
    RSU = "rsu"


class Node(FaceDispatcher):
    """
    One NDN node.

    Face routing: the application face goes to the consumer app, the backhaul face to
    the origin server, and the V2V face and every GeoFace to the LAL.
    """

    def __init__(
        self,
        node_id: int,
        label: str,
        kind: NodeKind,
        position: Callable[[int], Position | None],
        config: ScenarioConfig,
        scheduler: EventScheduler,
        rng: np.random.Generator,
        graph: RoadGraph,
        grid: GeoGrid,
        channel: BroadcastChannel,
        next_packet_id: Callable[[], int],
        log: EventLog | None = None,
        origin: OriginServer | None = None,
    ) -> None:
        self.node_id = node_id
        self.label = label
        self.kind = kind
        self._position_at = position
        self._cached: tuple[int, Position | None] | None = None
        self.scheduler = scheduler
        self.channel = channel
        self.next_packet_id = next_packet_id
        self.log = log
        self.origin = origin
        self.app: ConsumerApp | None = None
        self.cs = ContentStore(config.ndn.cs_capacity_bytes)
        self.pit = Pit(ms_to_us(config.ndn.pit_lifetime_ms))
        self.fib = Fib()
        self.strategy = build_strategy(
            config.strategy_name, self.fib, scheduler, rng, config.strategy
        )
        self.lal = LinkAdaptationLayer(
            node_id,
            graph,
            grid,
            config.lal,
            scheduler,
            rng,
            self.fib,
            self.position,
            self._transmit,
            log,
        )
        self.forwarder = Forwarder(
            node_id,
            self.cs,
            self.pit,
            self.fib,
            self.strategy,
            self,
            scheduler,
            on_cs_hit=self._stamp_cache_hit,
        )
        self.lal.forwarder = self.forwarder
        channel.attach(node_id, self.position, self.lal.on_frame)

    @property
    def is_rsu(self) -> bool:
        return self.kind is NodeKind.RSU

    def position(self) -> Position | None:
        """Current position, None while the vehicle is off the map."""
        now = self.scheduler.now
        if self._cached is None or self._cached[0] != now:
            self._cached = (now, self._position_at(now))
        return self._cached[1]

    def tx_queue_depth(self) -> int:
        """Transmissions scheduled by the LAL plus frames waiting at the MAC."""
        return self.lal.pending_count() + self.channel.queue_depth(self.node_id)

    # ---- FaceDispatcher ----

    def send_interest(self, interest: Interest, face: int, local: bool) -> bool:
        if face == APP_FACE:
            return False
        if face == BACKHAUL_FACE:
            if self.origin is None:
                return False
            return self.origin.request(self.node_id, interest)
        return self.lal.send_interest(interest, face, local)

    def send_data(self, data: Data, face: int, local: bool) -> None:
        if face == APP_FACE:
            if self.app is not None:
                self.scheduler.schedule(0, self.app.on_data, data)
            return
        if face == BACKHAUL_FACE:
            return
        self.lal.send_data(data, face, local)

    # ---- backhaul and housekeeping ----

    def deliver_from_backhaul(self, data: Data) -> None:
        self.forwarder.on_data(data, BACKHAUL_FACE)

    def maintain(self) -> None:
        """Drop expired PIT entries and idle GeoFaces."""
        self.forwarder.purge()
        self.lal.expire_idle_faces()

    def record_fib_width(self) -> None:
        if self.log is not None:
            self.log.record(
                FIB_WIDTH,
                self.scheduler.now,
                node=self.node_id,
                max_faces=self.fib.max_faces_per_prefix,
            )

    def _stamp_cache_hit(self, data: Data) -> Data:
        kind = SourceKind.RSU_CACHE if self.is_rsu else SourceKind.CAR_CACHE
        return replace(data, lineage=Lineage(self.next_packet_id(), self.node_id, kind))

    def _transmit(self, frame: Frame) -> None:
        self.channel.enqueue(frame)

    def __repr__(self) -> str:
        return f"Node({self.node_id}, {self.label!r}, {self.kind.value})"
