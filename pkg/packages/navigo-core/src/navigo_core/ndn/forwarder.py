"""Per-node NDN pipeline: CS, PIT, strategy and faces."""

from __future__ import annotations

import logging
from collections.abc import Callable
from enum import Enum

from navigo_core.core.interfaces import EventScheduler, FaceDispatcher, ForwardingStrategy
from navigo_core.core.models import APP_FACE, Data, Interest, Name
from navigo_core.ndn.tables import ContentStore, Fib, Pit, PitDecision

logger = logging.getLogger(__name__)


class InterestOutcome(Enum):
    """What the forwarder did with an incoming Interest."""

    CS_HIT = "cs_hit"
    FORWARDED = "forwarded"
    AGGREGATED = "aggregated"
    DUPLICATE = "duplicate"
    REFUSED = "refused"


class Forwarder:
    """
    Standard NDN Interest/Data pipeline.

    Interests go CS -> PIT -> static route or strategy -> face. Data goes PIT ->
    downstream faces -> CS; unsolicited Data is dropped without caching.
    """

    def __init__(
        self,
        node_id: int,
        cs: ContentStore,
        pit: Pit,
        fib: Fib,
        strategy: ForwardingStrategy,
        dispatcher: FaceDispatcher,
        scheduler: EventScheduler,
        on_cs_hit: Callable[[Data], Data] | None = None,
    ) -> None:
        self.node_id = node_id
        self.cs = cs
        self.pit = pit
        self.fib = fib
        self.strategy = strategy
        self.dispatcher = dispatcher
        self.scheduler = scheduler
        self.on_cs_hit = on_cs_hit
        self.static_routes: dict[Name, int] = {}

    def add_static_route(self, prefix: Name, face: int) -> None:
        """Route ``prefix`` to ``face`` without consulting the strategy."""
        self.static_routes[prefix] = face

    def on_interest(self, interest: Interest, in_face: int) -> InterestOutcome:
        now = self.scheduler.now
        cached = self.cs.lookup(interest.name, now)
        if cached is not None:
            reply = self.on_cs_hit(cached) if self.on_cs_hit else cached
            logger.debug(f"node {self.node_id}: CS hit {interest.name} -> face {in_face}")
            self.dispatcher.send_data(reply, in_face, local=True)
            return InterestOutcome.CS_HIT

        decision = self.pit.on_interest(interest, in_face, now)
        if decision is PitDecision.DUPLICATE_DROP:
            return InterestOutcome.DUPLICATE
        if decision is PitDecision.AGGREGATE:
            return InterestOutcome.AGGREGATED

        local = in_face == APP_FACE
        prefix = interest.routable_prefix or interest.name
        out_face = self._static_route(interest.name)
        via_strategy = out_face is None
        if out_face is None:
            out_face = self.strategy.choose_face(interest, self.fib.lookup(interest.name))

        if not self.dispatcher.send_interest(interest, out_face, local):
            self.pit.remove_downstream(interest.name, in_face)
            return InterestOutcome.REFUSED

        entry = self.pit.get(interest.name, now)
        if entry is not None:
            entry.out_face = out_face
        if via_strategy:
            self.strategy.after_send(interest, prefix, out_face, local)
        return InterestOutcome.FORWARDED

    def on_data(self, data: Data, in_face: int) -> list[int]:
        """
        Consume the matching PIT entry and pass Data downstream.

        Returns:
            Downstream faces the Data was delivered on; empty if unsolicited
        """
        now = self.scheduler.now
        entry = self.pit.satisfy(data.name, now)
        if entry is None:
            logger.debug(f"node {self.node_id}: unsolicited {data.name} on face {in_face}")
            return []
        self.cs.insert(data, now)
        prefix = entry.routable_prefix or data.routable_prefix or data.name
        self.strategy.on_satisfied(data.name, prefix, entry.out_face)
        faces = sorted(entry.downstream)
        for face in faces:
            self.dispatcher.send_data(data, face, local=False)
        return faces

    def withdraw(self, name: Name, face: int = APP_FACE) -> None:
        """Remove ``face`` from the pending entry so a re-expression is forwarded."""
        self.pit.remove_downstream(name, face)

    def purge(self) -> int:
        return self.pit.purge_expired(self.scheduler.now)

    def _static_route(self, name: Name) -> int | None:
        for prefix, face in self.static_routes.items():
            if prefix.is_prefix_of(name):
                return face
        return None
