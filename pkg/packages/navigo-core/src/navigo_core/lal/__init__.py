"""Link Adaptation Layer: GeoFaces, L2.5 header, timers and broadcast forwarding."""

from navigo_core.lal.f2a import F2ATable, InterestFromNetwork, NetworkInterest
from navigo_core.lal.header import Frame, L25Header, decode_header, encode_header
from navigo_core.lal.layer import (
    ForwardDecision,
    LinkAdaptationLayer,
    PendingTransmission,
    TxMode,
)
from navigo_core.lal.timers import TimerParams, deterministic_timer, waiting_timer

__all__ = [
    "F2ATable",
    "ForwardDecision",
    "Frame",
    "InterestFromNetwork",
    "L25Header",
    "LinkAdaptationLayer",
    "NetworkInterest",
    "PendingTransmission",
    "TimerParams",
    "TxMode",
    "decode_header",
    "deterministic_timer",
    "encode_header",
    "waiting_timer",
]
