"""Content Store, Pending Interest Table and FIB."""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum

from navigo_core.core.models import APP_FACE, Data, Interest, Name

logger = logging.getLogger(__name__)

DEFAULT_PIT_LIFETIME_US = 4_000_000


class ContentStore:
    """
    Exact-match cache with LRU eviction and byte accounting.

    Attributes:
        capacity: Maximum total payload bytes
        used: Payload bytes currently stored
    """

    def __init__(self, capacity: int) -> None:
        if capacity <= 0:
            raise ValueError("Content Store capacity must be positive")
        self.capacity = capacity
        self.used = 0
        self._entries: OrderedDict[Name, tuple[Data, int]] = OrderedDict()

    def insert(self, data: Data, now: int = 0) -> list[Name]:
        """
        Store ``data``, evicting least recently used entries until it fits.

        Returns:
            Names evicted, oldest first. An oversized payload is rejected with an
            empty list and no state change.
        """
        if data.payload_size > self.capacity:
            logger.debug(f"CS rejected oversized {data.name} ({data.payload_size} B)")
            return []
        previous = self._entries.pop(data.name, None)
        if previous is not None:
            self.used -= previous[0].payload_size
        evicted: list[Name] = []
        while self.used + data.payload_size > self.capacity:
            name, (old, _) = self._entries.popitem(last=False)
            self.used -= old.payload_size
            evicted.append(name)
        self._entries[data.name] = (data, now)
        self.used += data.payload_size
        return evicted

    def lookup(self, name: Name, now: int = 0) -> Data | None:
        """Exact-name lookup; a hit refreshes recency."""
        hit = self._entries.get(name)
        if hit is None:
            return None
        self._entries.move_to_end(name)
        self._entries[name] = (hit[0], now)
        return hit[0]

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)


class PitDecision(Enum):
    FORWARD = "forward"
    AGGREGATE = "aggregate"
    DUPLICATE_DROP = "duplicate_drop"


@dataclass
class PitEntry:
    """
    Pending Interest state for one name.

    Attributes:
        name: Pending name
        downstream: Faces the Data must be returned on
        nonces_seen: Every nonce received for this name
        created: Creation time in microseconds
        lifetime: Lifetime in microseconds, refreshed by forwarded retransmissions
        out_face: Face the Interest was last forwarded on
        routable_prefix: Prefix carried by the Interest
    """

    name: Name
    downstream: set[int] = field(default_factory=set)
    nonces_seen: set[int] = field(default_factory=set)
    created: int = 0
    lifetime: int = DEFAULT_PIT_LIFETIME_US
    out_face: int | None = None
    routable_prefix: Name | None = None

    def expires_at(self) -> int:
        return self.created + self.lifetime

    def is_expired(self, now: int) -> bool:
        return now >= self.expires_at()


class Pit:
    """Pending Interest Table with lazy and periodic expiry."""

    def __init__(self, lifetime_us: int = DEFAULT_PIT_LIFETIME_US) -> None:
        self.lifetime_us = lifetime_us
        self._entries: dict[Name, PitEntry] = {}

    def on_interest(self, interest: Interest, ingress_face: int, now: int) -> PitDecision:
        """
        Record an Interest that missed the CS.

        A known nonce is a duplicate. A fresh nonce on a face already downstream is a
        retransmission and is forwarded again, and so is a fresh nonce from the local
        application even when only network faces are pending. Any other new face
        aggregates.
        """
        entry = self.get(interest.name, now)
        if entry is None:
            self._entries[interest.name] = PitEntry(
                name=interest.name,
                downstream={ingress_face},
                nonces_seen={interest.nonce},
                created=now,
                lifetime=self.lifetime_us,
                routable_prefix=interest.routable_prefix,
            )
            return PitDecision.FORWARD
        if interest.nonce in entry.nonces_seen:
            return PitDecision.DUPLICATE_DROP
        entry.nonces_seen.add(interest.nonce)
        if ingress_face in entry.downstream or ingress_face == APP_FACE:
            entry.downstream.add(ingress_face)
            entry.created = now
            return PitDecision.FORWARD
        entry.downstream.add(ingress_face)
        return PitDecision.AGGREGATE

    def get(self, name: Name, now: int) -> PitEntry | None:
        """Live entry for ``name``; an expired entry is dropped on access."""
        entry = self._entries.get(name)
        if entry is not None and entry.is_expired(now):
            del self._entries[name]
            return None
        return entry

    def satisfy(self, name: Name, now: int) -> PitEntry | None:
        """Remove and return the live entry matched by a Data packet."""
        entry = self.get(name, now)
        if entry is not None:
            del self._entries[name]
        return entry

    def remove_downstream(self, name: Name, face: int) -> None:
        """Drop one downstream face, deleting the entry once none remain."""
        entry = self._entries.get(name)
        if entry is None:
            return
        entry.downstream.discard(face)
        if not entry.downstream:
            del self._entries[name]

    def purge_expired(self, now: int) -> int:
        expired = [n for n, e in self._entries.items() if e.is_expired(now)]
        for name in expired:
            del self._entries[name]
        return len(expired)

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class FibEntry:
    """
    Routable prefix and the faces bound to it.

    Attributes:
        prefix: Routable prefix
        faces: Bound faces in registration order, no duplicates
        cursor: Round-robin position, kept across mutations
    """

    prefix: Name
    faces: list[int] = field(default_factory=list)
    cursor: int = 0


class Fib:
    """Forwarding Information Base with longest-prefix match."""

    def __init__(self) -> None:
        self._entries: dict[Name, FibEntry] = {}
        self.max_faces_per_prefix = 0

    def lookup(self, name: Name) -> FibEntry | None:
        """Entry with the longest prefix of ``name``, or None."""
        for n in range(len(name), 0, -1):
            entry = self._entries.get(Name(name.components[:n]))
            if entry is not None:
                return entry
        return None

    def register(self, prefix: Name, face: int) -> bool:
        """
        Bind ``face`` to ``prefix``; idempotent.

        Returns:
            True if the binding is new
        """
        entry = self._entries.setdefault(prefix, FibEntry(prefix))
        if face in entry.faces:
            return False
        entry.faces.append(face)
        self.max_faces_per_prefix = max(self.max_faces_per_prefix, len(entry.faces))
        logger.debug(f"FIB {prefix} += face {face} ({len(entry.faces)} faces)")
        return True

    def unbind(self, prefix: Name, face: int) -> bool:
        """Remove one binding; the entry goes with its last face."""
        entry = self._entries.get(prefix)
        if entry is None or face not in entry.faces:
            return False
        index = entry.faces.index(face)
        entry.faces.remove(face)
        if index < entry.cursor:
            entry.cursor -= 1
        if not entry.faces:
            del self._entries[prefix]
        logger.debug(f"FIB {prefix} -= face {face}")
        return True

    def remove_face(self, face: int) -> list[Name]:
        """Remove ``face`` from every entry; returns the prefixes touched."""
        touched = [p for p, e in self._entries.items() if face in e.faces]
        for prefix in touched:
            self.unbind(prefix, face)
        return touched

    def faces_of(self, prefix: Name) -> list[int]:
        entry = self._entries.get(prefix)
        return list(entry.faces) if entry else []

    def prefixes(self) -> list[Name]:
        return list(self._entries)

    def __len__(self) -> int:
        return len(self._entries)
