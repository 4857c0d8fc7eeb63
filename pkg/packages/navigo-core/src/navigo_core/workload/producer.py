"""The streaming origin behind the RSUs, and location-dependent consumer binding."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING

from navigo_core.core.config_service import RsuConfig
from navigo_core.core.interfaces import EventScheduler
from navigo_core.core.models import Data, Interest, Lineage, Name, SourceKind
from navigo_core.metrics.log import ORIGIN_REQUEST, EventLog
from navigo_core.sim.events import ms_to_us
from navigo_core.workload.catalog import Catalog

if TYPE_CHECKING:
    from navigo_core.lal.layer import LinkAdaptationLayer
    from navigo_core.ndn.tables import Fib

logger = logging.getLogger(__name__)


@dataclass
class _Backhaul:
    config: RsuConfig
    deliver: Callable[[Data], None]
    busy_until: int = 0


class OriginServer:
    """
    Holds every chunk of the catalog and answers over each RSU's wired link.

    A reply leaves after the link latency and is then serialized at the link rate
    behind earlier replies on the same link. Every request that reaches the server is
    logged, duplicates included. Names outside the catalog get no answer.
    """

    def __init__(
        self,
        node_id: int,
        catalog: Catalog,
        scheduler: EventScheduler,
        next_packet_id: Callable[[], int],
        log: EventLog | None = None,
    ) -> None:
        self.node_id = node_id
        self.catalog = catalog
        self.scheduler = scheduler
        self.next_packet_id = next_packet_id
        self.log = log
        self.requests = 0
        self._links: dict[int, _Backhaul] = {}

    def attach_rsu(self, rsu_node: int, config: RsuConfig, deliver: Callable[[Data], None]) -> None:
        self._links[rsu_node] = _Backhaul(config, deliver)

    def request(self, rsu_node: int, interest: Interest) -> bool:
        """
        Serve an Interest forwarded over the backhaul of ``rsu_node``.

        Returns:
            False if the RSU has no link to this server
        """
        link = self._links.get(rsu_node)
        if link is None:
            logger.warning(f"node {rsu_node}: no backhaul to the origin")
            return False
        now = self.scheduler.now
        self.requests += 1
        if self.log is not None:
            self.log.record(ORIGIN_REQUEST, now, rsu=rsu_node, name=str(interest.name))
        data = self.catalog.make_data(
            interest.name,
            Lineage(self.next_packet_id(), self.node_id, SourceKind.ORIGIN),
        )
        if data is None:
            logger.debug(f"origin: {interest.name} is not in the catalog")
            return True
        serialization = math.ceil(data.wire_size * 8 * 1_000_000 / link.config.backhaul_bps)
        start = max(now + ms_to_us(link.config.backhaul_latency_ms), link.busy_until)
        link.busy_until = start + serialization
        self.scheduler.schedule(link.busy_until - now, link.deliver, data)
        return True


def consumer_prebind(
    fib: Fib, lal: LinkAdaptationLayer, prefix: Name, area: str
) -> int:
    """
    Bind ``prefix`` to the GeoFace of ``area`` before any Interest is sent.

    Returns:
        The GeoFace id
    """
    lal.grid.parse_label(area)
    face = lal.get_or_create_geoface(area)
    fib.register(prefix, face)
    logger.debug(f"node {lal.node_id}: {prefix} prebound to {area} (face {face})")
    return face
