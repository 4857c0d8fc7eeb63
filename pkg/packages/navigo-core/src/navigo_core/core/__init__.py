"""Core models, interfaces and errors for navigo-sim."""

from navigo_core.core.errors import (
    CalibrationError,
    ConfigError,
    GeoDomainError,
    HeaderError,
    LabelParseError,
    NavigoError,
    RoadGraphError,
    TraceError,
)
from navigo_core.core.models import (
    APP_FACE,
    BACKHAUL_FACE,
    FIRST_GEOFACE_ID,
    V2V_FACE,
    Data,
    FpClass,
    Interest,
    Lineage,
    Name,
    PacketKind,
    Position,
    SourceKind,
)

__all__ = [
    "APP_FACE",
    "BACKHAUL_FACE",
    "FIRST_GEOFACE_ID",
    "V2V_FACE",
    "CalibrationError",
    "ConfigError",
    "Data",
    "FpClass",
    "GeoDomainError",
    "HeaderError",
    "Interest",
    "LabelParseError",
    "Lineage",
    "Name",
    "NavigoError",
    "PacketKind",
    "Position",
    "RoadGraphError",
    "SourceKind",
    "TraceError",
]
