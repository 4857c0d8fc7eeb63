"""Event log and evaluation metrics."""

from navigo_core.metrics.log import EVENT_KINDS, EventLog, load_event_log
from navigo_core.metrics.report import (
    MetricsReport,
    compute_report,
    infra_load,
    infra_offload,
    mules_histogram,
    overhead,
    rtt_percentile,
    success_rate,
    user_satisfaction,
    write_report,
)

__all__ = [
    "EVENT_KINDS",
    "EventLog",
    "MetricsReport",
    "compute_report",
    "infra_load",
    "infra_offload",
    "load_event_log",
    "mules_histogram",
    "overhead",
    "rtt_percentile",
    "success_rate",
    "user_satisfaction",
    "write_report",
]
