"""
Link Adaptation Layer.

Sits between the NDN forwarder and the broadcast channel. Going up, it decodes the
L2.5 header, remembers where each Interest came from and hands packets to the
forwarder on the GeoFace of their area. Going down, it decides whether this node
makes progress toward the destination area, waits a position-dependent timer,
broadcasts and listens for implicit acknowledgments.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from navigo_core.core.config_service import LalConfig
from navigo_core.core.errors import GeoDomainError, HeaderError, LabelParseError
from navigo_core.core.interfaces import Cancellable, EventScheduler
from navigo_core.core.models import V2V_FACE, Data, FpClass, Interest, Name, PacketKind, Position
from navigo_core.geo.grid import GeoArea, GeoGrid
from navigo_core.geo.road_graph import PathResult, RoadGraph
from navigo_core.lal.f2a import F2ATable, InterestFromNetwork, NetworkInterest
from navigo_core.lal.header import Frame, L25Header, decode_header, encode_header
from navigo_core.lal.timers import TimerParams, waiting_timer
from navigo_core.metrics.log import MALFORMED_FRAME, EventLog
from navigo_core.ndn.tables import Fib
from navigo_core.sim.events import ms_to_us, s_to_us

if TYPE_CHECKING:
    from navigo_core.ndn.forwarder import Forwarder

logger = logging.getLogger(__name__)

PendingKey = tuple[str, object]


class TxMode(Enum):
    """How a packet leaves this node."""

    DIRECTED = "directed"
    FLOOD = "flood"
    LOCAL_FLOOD = "local_flood"
    REVERSE = "reverse"


@dataclass(frozen=True)
class ForwardDecision:
    """
    Outcome of the progress test.

    Attributes:
        forward: Whether this node should transmit
        mode: Transmission mode when forwarding
        path: Shortest-path result from this node, for directed Interests
        reason: Short tag for logs when dropping
    """

    forward: bool
    mode: TxMode | None = None
    path: PathResult | None = None
    reason: str = ""


@dataclass
class PendingTransmission:
    """
    A packet scheduled for broadcast or awaiting its implicit ACK.

    Attributes:
        key: ("I", nonce) for Interests, ("D", name) for Data
        packet: Packet to broadcast
        mode: Transmission mode
        fire_time: Scheduled broadcast time in microseconds
        prev_hop_pos: Where the packet was received from (None if generated here)
        dest_area: Destination area label of a directed Interest
        target: Requester position for Data closeness checks
        required_ack_directions: Street ids that must echo the packet
        ack_on_any_copy: Any echo ends the wait (local flooding inside the area)
        retries_left: Rebroadcasts allowed when the ACK does not come
        nonce: L2.5 nonce carried on the air
        provider_area: Provider label attached to Data
        awaiting_ack: True once broadcast
        event: Pending timer or ACK timeout
    """

    key: PendingKey
    packet: Interest | Data
    mode: TxMode
    fire_time: int
    prev_hop_pos: Position | None
    dest_area: str | None
    target: Position | None
    required_ack_directions: set[int]
    retries_left: int
    nonce: int
    provider_area: str | None = None
    ack_on_any_copy: bool = False
    awaiting_ack: bool = False
    event: Cancellable | None = field(default=None, repr=False)


class LinkAdaptationLayer:
    """Per-node LAL state and packet handling."""

    def __init__(
        self,
        node_id: int,
        graph: RoadGraph,
        grid: GeoGrid,
        config: LalConfig,
        scheduler: EventScheduler,
        rng: np.random.Generator,
        fib: Fib,
        position: Callable[[], Position | None],
        transmit: Callable[[Frame], None],
        log: EventLog | None = None,
    ) -> None:
        self.node_id = node_id
        self.graph = graph
        self.grid = grid
        self.config = config
        self.timers = TimerParams.from_config(config)
        self.scheduler = scheduler
        self.rng = rng
        self.fib = fib
        self.position = position
        self.transmit = transmit
        self.log = log
        self.forwarder: Forwarder | None = None
        self.f2a = F2ATable()
        self.interest_from_network = InterestFromNetwork(config.interest_table_size)
        self.pending: dict[PendingKey, PendingTransmission] = {}
        self.malformed_frames = 0
        self.suppressed = 0
        self.retransmissions = 0
        self._interest_origin: OrderedDict[Name, tuple[int, Position]] = OrderedDict()
        self._data_arrival: dict[Name, tuple[Position, int]] = {}

    # ---- faces ----

    def get_or_create_geoface(self, area: str) -> int:
        return self.f2a.get_or_create(area, self.scheduler.now)

    def expire_idle_faces(self) -> list[int]:
        """Drop GeoFaces idle past the timeout together with their FIB bindings."""
        dead = self.f2a.expire_idle(self.scheduler.now, s_to_us(self.config.geoface_idle_s))
        for face in dead:
            touched = self.fib.remove_face(face)
            logger.debug(
                f"node {self.node_id}: GeoFace {face} expired, unbound from {len(touched)} prefixes"
            )
        return dead

    def pending_count(self) -> int:
        """Scheduled transmissions not yet on the air."""
        return sum(1 for p in self.pending.values() if not p.awaiting_ack)

    # ---- up the stack ----

    def on_frame(self, frame: Frame) -> None:
        """Entry point for every frame the channel delivers to this node."""
        try:
            header = decode_header(frame.header)
            if header.kind is not frame.kind:
                raise HeaderError("header kind does not match packet")
            for label in (header.dest_area, header.provider_area):
                if label is not None:
                    self.grid.parse_label(label)
        except (HeaderError, LabelParseError) as e:
            self.malformed_frames += 1
            if self.log is not None:
                self.log.record(
                    MALFORMED_FRAME, self.scheduler.now, node=self.node_id, sender=frame.sender
                )
            logger.warning(f"node {self.node_id}: dropped frame from {frame.sender}: {e}")
            return
        self.on_overhear(frame.packet, header)
        if isinstance(frame.packet, Interest):
            self.on_wire_interest(frame.packet, header)
        else:
            self.on_wire_data(frame.packet, header)

    def on_wire_interest(self, interest: Interest, header: L25Header) -> None:
        """Store (nonce, previous hop, DA) and pass the Interest to the forwarder."""
        now = self.scheduler.now
        if header.routable_prefix is not None:
            interest = replace(interest, routable_prefix=header.routable_prefix)
        self.interest_from_network.store(
            header.nonce, NetworkInterest(header.prev_hop_pos, header.dest_area, now)
        )
        self._remember_origin(interest.name, header.nonce, header.prev_hop_pos)
        face = self.get_or_create_geoface(header.dest_area) if header.dest_area else V2V_FACE
        self._forwarder().on_interest(interest, face)

    def on_wire_data(self, data: Data, header: L25Header) -> None:
        """
        Deliver Data through the GeoFace of its provider area and learn the binding
        of its routable prefix when it satisfies a pending Interest.
        """
        forwarder = self._forwarder()
        if data.name not in forwarder.pit:
            logger.debug(f"node {self.node_id}: unsolicited {data.name} dropped")
            return
        prefix = header.routable_prefix or data.routable_prefix
        data = replace(data, provider_area=header.provider_area, routable_prefix=prefix)
        face = V2V_FACE
        if header.provider_area:
            face = self.get_or_create_geoface(header.provider_area)
        self._data_arrival[data.name] = (header.prev_hop_pos, header.nonce)
        try:
            delivered = forwarder.on_data(data, face)
        finally:
            self._data_arrival.pop(data.name, None)
        if delivered and header.provider_area and prefix is not None:
            self.fib.register(prefix, face)

    def on_overhear(self, packet: Interest | Data, header: L25Header) -> None:
        """
        Apply implicit ACKs and suppression for a packet heard on the air.

        An overheard Interest acknowledges the directions it was heard from and may
        suppress our own pending copy. Overheard Data cancels pending Interests for the
        same name and pending copies of the same Data relayed from farther away.
        """
        sender_pos = header.prev_hop_pos
        if isinstance(packet, Interest):
            pending = self.pending.get(("I", header.nonce))
            if pending is None:
                return
            if pending.awaiting_ack:
                heard = self.graph.streets_at(sender_pos)
                pending.required_ack_directions -= heard
                if pending.ack_on_any_copy or not pending.required_ack_directions:
                    logger.debug(f"node {self.node_id}: Interest {packet.name} acknowledged")
                    self._finish(pending)
                return
            if self._suppressed_by(pending, sender_pos) or self._outrun_by(pending, sender_pos):
                self.suppressed += 1
                logger.debug(f"node {self.node_id}: Interest {packet.name} suppressed")
                self._finish(pending)
            return

        for key, pending in list(self.pending.items()):
            if key[0] == "I" and pending.packet.name == packet.name:
                logger.debug(f"node {self.node_id}: Interest {packet.name} cancelled by Data")
                self._finish(pending)
        pending_data = self.pending.get(("D", packet.name))
        if pending_data is not None and not pending_data.awaiting_ack:
            me = self.position()
            target = pending_data.target
            if me is None or target is None or sender_pos.distance_to(target) < me.distance_to(
                target
            ):
                self.suppressed += 1
                self._finish(pending_data)

    # ---- down the stack ----

    def forward_decision(
        self,
        kind: PacketKind,
        my_pos: Position,
        prev_pos: Position,
        dest_area: GeoArea | None = None,
        target: Position | None = None,
    ) -> ForwardDecision:
        """
        Progress test.

        Interests are forwarded only if this node's weighted path cost to the
        destination area is strictly below the previous hop's. Inside the area they
        are flooded locally; a copy leaving the area is dropped. Interests without an
        area are flooded. Data is forwarded only if this node is strictly closer than
        its previous hop to the node the Interest came from.
        """
        if kind is PacketKind.DATA:
            if target is None or my_pos.distance_to(target) < prev_pos.distance_to(target):
                return ForwardDecision(True, TxMode.REVERSE)
            return ForwardDecision(False, reason="not closer to requester")
        if dest_area is None:
            return ForwardDecision(True, TxMode.FLOOD)
        if dest_area.contains(my_pos):
            return ForwardDecision(True, TxMode.LOCAL_FLOOD)
        if dest_area.contains(prev_pos):
            return ForwardDecision(False, reason="left destination area")
        mine = self.graph.shortest_path_to_area(my_pos, dest_area)
        if not mine.reachable:
            return ForwardDecision(False, reason="destination unreachable")
        theirs = self.graph.shortest_path_to_area(prev_pos, dest_area)
        if theirs.reachable and not mine.cost < theirs.cost:
            return ForwardDecision(False, reason="no progress")
        return ForwardDecision(True, TxMode.DIRECTED, path=mine)

    def send_interest(self, interest: Interest, face: int, local: bool) -> bool:
        """
        Take an Interest from the strategy.

        Locally generated Interests carry this node as previous hop and the area of
        ``face`` (if a GeoFace) as destination, and wait the timer of a sender right
        next to this node. Relayed Interests keep the consumer's destination area and
        previous hop from InterestFromNetwork.

        Returns:
            False if the Interest will not be transmitted
        """
        me = self.position()
        if me is None:
            return False
        if local:
            dest_label = self.f2a.area_of(face)
            self.f2a.touch(face, self.scheduler.now)
            prev_pos = me
        else:
            remembered = self.interest_from_network.consume(interest.nonce)
            if remembered is None:
                logger.debug(f"node {self.node_id}: no network record for {interest.name}")
                return False
            dest_label = remembered.dest_area
            prev_pos = remembered.prev_hop_pos

        dest = self.grid.parse_label(dest_label) if dest_label else None
        if local and dest is not None and not dest.contains(me):
            path = self.graph.shortest_path_to_area(me, dest)
            if not path.reachable:
                # the strategy deadline unbinds the face
                logger.debug(f"node {self.node_id}: {dest_label} unreachable, not transmitted")
                return True
            decision = ForwardDecision(True, TxMode.DIRECTED, path=path)
        elif local:
            decision = ForwardDecision(
                True, TxMode.LOCAL_FLOOD if dest is not None else TxMode.FLOOD
            )
        else:
            decision = self.forward_decision(PacketKind.INTEREST, me, prev_pos, dest)
        if not decision.forward or decision.mode is None:
            logger.debug(f"node {self.node_id}: drop {interest.name} ({decision.reason})")
            return False

        if decision.mode is TxMode.DIRECTED and decision.path is not None:
            street = decision.path.street_id
            acks = {street} if street is not None else set(self.graph.streets_at(me))
        else:
            acks = set(self.graph.streets_at(me))
        delay = self._timer(PacketKind.INTEREST, me, prev_pos)
        self.schedule_tx(
            PendingTransmission(
                key=("I", interest.nonce),
                packet=interest,
                mode=decision.mode,
                fire_time=self.scheduler.now + delay,
                prev_hop_pos=None if local else prev_pos,
                dest_area=dest_label,
                target=None,
                required_ack_directions=acks,
                retries_left=self.config.retries,
                nonce=interest.nonce,
                # legs leaving the area never echo a local flood
                ack_on_any_copy=decision.mode is TxMode.LOCAL_FLOOD,
            )
        )
        return True

    def send_data(self, data: Data, face: int, local: bool) -> None:
        """
        Take Data from the forwarder for the reverse path.

        Relayed Data obeys the closeness rule and keeps its provider area. Data
        produced here (cache hit or producer) is stamped with this node's area.
        """
        me = self.position()
        if me is None or ("D", data.name) in self.pending:
            return
        self.f2a.touch(face, self.scheduler.now)
        origin = self._interest_origin.pop(data.name, None)
        target = origin[1] if origin else None
        arrival = None if local else self._data_arrival.get(data.name)
        if arrival is not None:
            prev_pos, nonce = arrival
            decision = self.forward_decision(PacketKind.DATA, me, prev_pos, target=target)
            if not decision.forward:
                logger.debug(f"node {self.node_id}: drop Data {data.name} ({decision.reason})")
                return
            provider_area = data.provider_area
        else:
            prev_pos = target or me
            nonce = int(self.rng.integers(0, 2**63))
            provider_area = self._area_label(me)
            data = replace(data, provider_area=provider_area)
        self.schedule_tx(
            PendingTransmission(
                key=("D", data.name),
                packet=data,
                mode=TxMode.REVERSE,
                fire_time=self.scheduler.now + self._timer(PacketKind.DATA, me, prev_pos),
                prev_hop_pos=prev_pos,
                dest_area=None,
                target=target,
                required_ack_directions=set(),
                retries_left=0,
                nonce=nonce,
                provider_area=provider_area,
            )
        )

    def schedule_tx(self, pending: PendingTransmission) -> PendingTransmission:
        """Queue a transmission at its fire time, replacing any older one with its key."""
        old = self.pending.pop(pending.key, None)
        if old is not None and old.event is not None:
            old.event.cancel()
        delay = max(0, pending.fire_time - self.scheduler.now)
        pending.event = self.scheduler.schedule(delay, self._fire, pending)
        self.pending[pending.key] = pending
        return pending

    # ---- internals ----

    def _fire(self, pending: PendingTransmission) -> None:
        if self.pending.get(pending.key) is not pending:
            return
        me = self.position()
        if me is None:
            self._finish(pending)
            return
        packet = pending.packet
        if isinstance(packet, Interest):
            header = L25Header(
                kind=PacketKind.INTEREST,
                nonce=pending.nonce,
                prev_hop_pos=me,
                dest_area=pending.dest_area,
                routable_prefix=packet.routable_prefix,
            )
        else:
            header = L25Header(
                kind=PacketKind.DATA,
                nonce=pending.nonce,
                prev_hop_pos=me,
                routable_prefix=packet.routable_prefix,
                provider_area=pending.provider_area,
            )
        self.transmit(Frame(self.node_id, encode_header(header), packet))
        if not pending.required_ack_directions:
            self._finish(pending)
            return
        pending.awaiting_ack = True
        pending.event = self.scheduler.schedule(
            ms_to_us(self.config.ack_timeout_ms), self._ack_timeout, pending
        )

    def _ack_timeout(self, pending: PendingTransmission) -> None:
        if self.pending.get(pending.key) is not pending:
            return
        if pending.retries_left <= 0:
            logger.debug(f"node {self.node_id}: no ACK for {pending.packet.name}, giving up")
            self._finish(pending)
            return
        pending.retries_left -= 1
        self.retransmissions += 1
        pending.awaiting_ack = False
        pending.fire_time = self.scheduler.now
        pending.event = self.scheduler.schedule(0, self._fire, pending)

    def _finish(self, pending: PendingTransmission) -> None:
        if pending.event is not None:
            pending.event.cancel()
        if self.pending.get(pending.key) is pending:
            del self.pending[pending.key]

    def _suppressed_by(self, pending: PendingTransmission, forwarder_pos: Position) -> bool:
        me = self.position()
        if me is None:
            return True
        if pending.prev_hop_pos is not None and _between(
            pending.prev_hop_pos, forwarder_pos, me, self.config.corridor_width_m
        ):
            return True
        mine = self.graph.classify_fp(me)
        theirs = self.graph.classify_fp(forwarder_pos)
        if theirs is not FpClass.EDGE and mine is FpClass.EDGE:
            return True
        if theirs is not FpClass.EDGE and mine is not FpClass.EDGE:
            a = self.graph.nearest_junction(me)
            b = self.graph.nearest_junction(forwarder_pos)
            return a is not None and b is not None and a[0].node_id == b[0].node_id
        return False

    def _outrun_by(self, pending: PendingTransmission, forwarder_pos: Position) -> bool:
        """A directed copy is dropped once a peer at least as close to the area sent it."""
        if pending.mode is not TxMode.DIRECTED or pending.dest_area is None:
            return False
        me = self.position()
        if me is None:
            return True
        dest = self.grid.parse_label(pending.dest_area)
        if dest.contains(forwarder_pos):
            return True
        theirs = self.graph.shortest_path_to_area(forwarder_pos, dest)
        mine = self.graph.shortest_path_to_area(me, dest)
        return theirs.reachable and not mine.cost < theirs.cost

    def _timer(self, kind: PacketKind, me: Position, prev_pos: Position) -> int:
        fp = self.graph.classify_fp(me)
        ms = waiting_timer(self.timers, kind, fp, me.distance_to(prev_pos), self.rng)
        return ms_to_us(ms)

    def _area_label(self, pos: Position) -> str | None:
        try:
            return self.grid.area_of(pos).label
        except GeoDomainError:
            logger.warning(f"node {self.node_id}: position {pos} outside the grid")
            return None

    def _remember_origin(self, name: Name, nonce: int, pos: Position) -> None:
        # copies of the same emission echoed by later hops must not move the origin
        known = self._interest_origin.get(name)
        if known is not None and known[0] == nonce:
            return
        self._interest_origin[name] = (nonce, pos)
        self._interest_origin.move_to_end(name)
        while len(self._interest_origin) > self.config.interest_table_size:
            self._interest_origin.popitem(last=False)

    def _forwarder(self) -> Forwarder:
        if self.forwarder is None:
            raise RuntimeError(f"LAL of node {self.node_id} has no forwarder attached")
        return self.forwarder


def _between(a: Position, b: Position, p: Position, corridor: float) -> bool:
    """Whether ``p`` projects inside segment a-b within ``corridor`` meters of it."""
    dx, dy = b.x - a.x, b.y - a.y
    sq = dx * dx + dy * dy
    if sq == 0:
        return False
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / sq
    if not 0.0 <= t <= 1.0:
        return False
    offset = abs((p.x - a.x) * dy - (p.y - a.y) * dx) / sq**0.5
    return offset <= corridor
