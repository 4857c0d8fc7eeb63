"""NDN engine: tables and forwarding pipeline."""

from navigo_core.ndn.forwarder import Forwarder, InterestOutcome
from navigo_core.ndn.tables import ContentStore, Fib, FibEntry, Pit, PitDecision, PitEntry

__all__ = [
    "ContentStore",
    "Fib",
    "FibEntry",
    "Forwarder",
    "InterestOutcome",
    "Pit",
    "PitDecision",
    "PitEntry",
]
