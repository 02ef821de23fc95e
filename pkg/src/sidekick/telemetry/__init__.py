"""Usage telemetry: redaction, the append-only event log, and the metrics report."""

from .events import EventLog, UsageEvent, read_events
from .metrics import MetricsReport, classify_hours, compute_metrics
from .redact import redact_source

__all__ = [
    "EventLog",
    "UsageEvent",
    "read_events",
    "MetricsReport",
    "classify_hours",
    "compute_metrics",
    "redact_source",
]
