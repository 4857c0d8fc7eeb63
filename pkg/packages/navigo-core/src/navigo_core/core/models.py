"""Core data models shared by the protocol and simulation modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

# Face identifiers reserved by every node. GeoFaces are allocated from FIRST_GEOFACE_ID up.
APP_FACE = 0
V2V_FACE = 1
BACKHAUL_FACE = 2
FIRST_GEOFACE_ID = 256


class PacketKind(Enum):
    """Wire packet class."""

    INTEREST = "interest"
    DATA = "data"


class FpClass(Enum):
    """Forwarding-point class of a position relative to the nearest junction."""

    FP1 = "fp1"
    FP2 = "fp2"
    EDGE = "edge"


class SourceKind(Enum):
    """Where the Data packet satisfying an Interest was produced."""

    ORIGIN = "origin"
    RSU_CACHE = "rsu_cache"
    CAR_CACHE = "car_cache"


@dataclass(frozen=True)
class Position:
    """
    Point on the local plane.

    Attributes:
        x: Meters east of the world origin
        y: Meters north of the world origin
    """

    x: float
    y: float

    def distance_to(self, other: Position) -> float:
        """Euclidean distance in meters."""
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_finite(self) -> bool:
        """Check that both coordinates are finite numbers."""
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True)
class Name:
    """
    Hierarchical NDN name.

    Attributes:
        components: Ordered, non-empty UTF-8 components
    """

    components: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("Name needs at least one component")
        if any(not c for c in self.components):
            raise ValueError(f"Name has an empty component: {self.components!r}")

    @classmethod
    def parse(cls, uri: str) -> Name:
        """
        Build a name from its URI form, e.g. "/provider/song3/chunk10".

        Raises:
            ValueError: If the URI has no components or an empty one
        """
        stripped = uri.strip()
        if not stripped.startswith("/"):
            raise ValueError(f"Name URI must start with '/': {uri!r}")
        return cls(tuple(stripped[1:].split("/")))

    def append(self, component: str) -> Name:
        """Return a new name with one more component."""
        return Name(self.components + (component,))

    def is_prefix_of(self, other: Name) -> bool:
        """Check whether this name is an equal or strict prefix of ``other``."""
        n = len(self.components)
        return n <= len(other.components) and other.components[:n] == self.components

    def __len__(self) -> int:
        return len(self.components)

    def __str__(self) -> str:
        return "/" + "/".join(self.components)


@dataclass(frozen=True)
class Lineage:
    """
    Simulation-only provenance of a Data packet; never encoded on the wire.

    Attributes:
        packet_id: Run-unique id assigned when the Data was produced
        source_node: Node id that produced the Data (origin server or cache holder)
        source_kind: Origin, RSU cache or car cache
    """

    packet_id: int
    source_node: int
    source_kind: SourceKind


@dataclass(frozen=True)
class Interest:
    """
    Interest packet.

    Attributes:
        name: Requested name
        nonce: 64-bit random value, fresh per emission
        routable_prefix: Prefix aggregating every chunk of the content
    """

    name: Name
    nonce: int
    routable_prefix: Name | None = None

    @property
    def wire_size(self) -> int:
        """Bytes on the air excluding the L2.5 header."""
        return 60 + len(str(self.name).encode("utf-8"))


@dataclass(frozen=True)
class Data:
    """
    Data packet.

    Attributes:
        name: Exact name of the chunk
        payload_size: Payload bytes
        routable_prefix: Prefix registered by learners when this Data satisfies an Interest
        provider_area: Label of the producer's geo-area, attached by its LAL
        lineage: Simulation-only provenance
    """

    name: Name
    payload_size: int
    routable_prefix: Name | None = None
    provider_area: str | None = None
    lineage: Lineage | None = field(default=None, compare=False)

    @property
    def wire_size(self) -> int:
        """Bytes on the air excluding the L2.5 header."""
        return self.payload_size + 40 + len(str(self.name).encode("utf-8"))
