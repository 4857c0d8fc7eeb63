"""
L2.5 header codec.

Layout, big-endian:

    version  u8     currently 1
    kind     u8     0 = Interest, 1 = Data
    flags    u8     bit 0 dest_area, bit 1 routable_prefix, bit 2 provider_area
    nonce    u64
    x, y     f64    previous-hop position in meters
    then, for each flag set in bit order:
    length   u16    followed by that many UTF-8 bytes

Interests never carry a provider area and Data never carries a destination area.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from navigo_core.core.errors import HeaderError
from navigo_core.core.models import Data, Interest, Name, PacketKind, Position

HEADER_VERSION = 1
_FIXED = struct.Struct(">BBBQdd")
_LENGTH = struct.Struct(">H")
_KIND_CODES = {PacketKind.INTEREST: 0, PacketKind.DATA: 1}
_KINDS = {v: k for k, v in _KIND_CODES.items()}

FLAG_DEST_AREA = 0x01
FLAG_PREFIX = 0x02
FLAG_PROVIDER_AREA = 0x04
_KNOWN_FLAGS = FLAG_DEST_AREA | FLAG_PREFIX | FLAG_PROVIDER_AREA


@dataclass(frozen=True)
class L25Header:
    """
    Geographic encapsulation of one packet.

    Attributes:
        kind: Interest or Data
        nonce: 64-bit value; the Interest nonce, or the emission id of a Data packet
        prev_hop_pos: Position of the node that transmitted this frame
        dest_area: Consumer-chosen destination area label (Interest only)
        routable_prefix: Prefix aggregating all chunks of the content
        provider_area: Area label of the node that produced the Data (Data only)
    """

    kind: PacketKind
    nonce: int
    prev_hop_pos: Position
    dest_area: str | None = None
    routable_prefix: Name | None = None
    provider_area: str | None = None


def encode_header(header: L25Header) -> bytes:
    """
    Serialize a header.

    Raises:
        HeaderError: If a field is out of range or not allowed for the packet kind
    """
    if not 0 <= header.nonce < 2**64:
        raise HeaderError(f"Nonce out of 64-bit range: {header.nonce}")
    if not header.prev_hop_pos.is_finite():
        raise HeaderError("Previous-hop position must be finite")
    if header.kind is PacketKind.INTEREST and header.provider_area is not None:
        raise HeaderError("Interest header cannot carry a provider area")
    if header.kind is PacketKind.DATA and header.dest_area is not None:
        raise HeaderError("Data header cannot carry a destination area")

    flags = 0
    tail = b""
    for flag, value in (
        (FLAG_DEST_AREA, header.dest_area),
        (FLAG_PREFIX, None if header.routable_prefix is None else str(header.routable_prefix)),
        (FLAG_PROVIDER_AREA, header.provider_area),
    ):
        if value is None:
            continue
        raw = value.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise HeaderError("Header field longer than 65535 bytes")
        flags |= flag
        tail += _LENGTH.pack(len(raw)) + raw
    head = _FIXED.pack(
        HEADER_VERSION,
        _KIND_CODES[header.kind],
        flags,
        header.nonce,
        header.prev_hop_pos.x,
        header.prev_hop_pos.y,
    )
    return head + tail


def decode_header(raw: bytes) -> L25Header:
    """
    Parse bytes produced by ``encode_header``.

    Raises:
        HeaderError: On truncation, trailing bytes, unknown version/kind/flags,
            bad UTF-8 or a field not allowed for the packet kind
    """
    if len(raw) < _FIXED.size:
        raise HeaderError(f"Header truncated: {len(raw)} bytes")
    version, kind_code, flags, nonce, x, y = _FIXED.unpack_from(raw, 0)
    if version != HEADER_VERSION:
        raise HeaderError(f"Unsupported header version {version}")
    kind = _KINDS.get(kind_code)
    if kind is None:
        raise HeaderError(f"Unknown packet kind {kind_code}")
    if flags & ~_KNOWN_FLAGS:
        raise HeaderError(f"Unknown header flags {flags:#04x}")
    if not (math.isfinite(x) and math.isfinite(y)):
        raise HeaderError("Previous-hop position is not finite")

    offset = _FIXED.size
    fields: dict[int, str] = {}
    for flag in (FLAG_DEST_AREA, FLAG_PREFIX, FLAG_PROVIDER_AREA):
        if not flags & flag:
            continue
        if offset + _LENGTH.size > len(raw):
            raise HeaderError("Header truncated in field length")
        (length,) = _LENGTH.unpack_from(raw, offset)
        offset += _LENGTH.size
        if offset + length > len(raw):
            raise HeaderError("Header truncated in field value")
        try:
            fields[flag] = raw[offset : offset + length].decode("utf-8")
        except UnicodeDecodeError as e:
            raise HeaderError(f"Header field is not UTF-8: {e}") from e
        offset += length
    if offset != len(raw):
        raise HeaderError(f"{len(raw) - offset} trailing bytes after header")

    prefix = None
    if FLAG_PREFIX in fields:
        try:
            prefix = Name.parse(fields[FLAG_PREFIX])
        except ValueError as e:
            raise HeaderError(f"Bad routable prefix: {e}") from e
    header = L25Header(
        kind=kind,
        nonce=nonce,
        prev_hop_pos=Position(x, y),
        dest_area=fields.get(FLAG_DEST_AREA),
        routable_prefix=prefix,
        provider_area=fields.get(FLAG_PROVIDER_AREA),
    )
    if kind is PacketKind.INTEREST and header.provider_area is not None:
        raise HeaderError("Interest header carries a provider area")
    if kind is PacketKind.DATA and header.dest_area is not None:
        raise HeaderError("Data header carries a destination area")
    return header


@dataclass(frozen=True)
class Frame:
    """
    One broadcast on the V2V channel: encoded L2.5 header plus the NDN packet.

    Attributes:
        sender: Transmitting node id
        header: Encoded L2.5 header bytes
        packet: Encapsulated Interest or Data
    """

    sender: int
    header: bytes
    packet: Interest | Data

    @property
    def kind(self) -> PacketKind:
        return PacketKind.DATA if isinstance(self.packet, Data) else PacketKind.INTEREST

    @property
    def size(self) -> int:
        """Bytes on the air."""
        return len(self.header) + self.packet.wire_size
