"""Face-to-Area table and the InterestFromNetwork table."""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

from navigo_core.core.models import FIRST_GEOFACE_ID, Position

logger = logging.getLogger(__name__)


class F2ATable:
    """
    Bijection between GeoFace ids and geo-area labels.

    Face ids are never reused, so a face evicted for idleness and then needed again
    comes back under a new id.
    """

    def __init__(self, first_face_id: int = FIRST_GEOFACE_ID) -> None:
        self._next_id = first_face_id
        self._by_area: dict[str, int] = {}
        self._by_face: dict[int, str] = {}
        self._last_use: dict[int, int] = {}

    def get_or_create(self, area: str, now: int) -> int:
        """Face bound to ``area``, created if absent; refreshes its last use."""
        face = self._by_area.get(area)
        if face is None:
            face = self._next_id
            self._next_id += 1
            self._by_area[area] = face
            self._by_face[face] = area
            logger.debug(f"GeoFace {face} bound to '{area}'")
        self._last_use[face] = now
        return face

    def touch(self, face: int, now: int) -> None:
        if face in self._by_face:
            self._last_use[face] = now

    def area_of(self, face: int) -> str | None:
        return self._by_face.get(face)

    def face_of(self, area: str) -> int | None:
        return self._by_area.get(area)

    def is_geoface(self, face: int) -> bool:
        return face in self._by_face

    def expire_idle(self, now: int, idle_us: int) -> list[int]:
        """Remove faces unused for ``idle_us`` or longer; returns their ids."""
        dead = [f for f, t in self._last_use.items() if now - t >= idle_us]
        for face in dead:
            area = self._by_face.pop(face)
            del self._by_area[area]
            del self._last_use[face]
        return dead

    def __len__(self) -> int:
        return len(self._by_face)


@dataclass(frozen=True)
class NetworkInterest:
    """What the LAL remembers about an Interest received from the air."""

    prev_hop_pos: Position
    dest_area: str | None
    arrival_time: int


class InterestFromNetwork:
    """Nonce-keyed table, bounded with oldest-first eviction."""

    def __init__(self, capacity: int = 4096) -> None:
        self.capacity = capacity
        self._entries: OrderedDict[int, NetworkInterest] = OrderedDict()

    def store(self, nonce: int, entry: NetworkInterest) -> None:
        self._entries.pop(nonce, None)
        self._entries[nonce] = entry
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)

    def consume(self, nonce: int) -> NetworkInterest | None:
        return self._entries.pop(nonce, None)

    def __contains__(self, nonce: object) -> bool:
        return nonce in self._entries

    def __len__(self) -> int:
        return len(self._entries)
