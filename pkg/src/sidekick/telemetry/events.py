"""Append-only usage event log, newline-delimited JSON, one event per line.

Staff usage (testing, demonstrations) is flagged at write time from a
configured ID list so analyses can exclude it.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterator

from ..model import KINDS, format_timestamp, parse_timestamp

EVENT_TYPES = ("session_created", "session_visited", "inference", "help_used")


class EventValidationError(ValueError):
    """A usage event violates the event schema."""


@dataclass
class UsageEvent:
    event_type: str
    owner_id: str
    error_kind: str
    timestamp: datetime
    session_token: str | None = None
    is_initial: bool | None = None
    is_staff: bool = False

    def validate(self) -> None:
        if self.event_type not in EVENT_TYPES:
            raise EventValidationError(f"unknown event type {self.event_type!r}")
        if not self.owner_id:
            raise EventValidationError("event needs an owner_id")
        if self.error_kind not in KINDS:
            raise EventValidationError(f"unknown error kind {self.error_kind!r}")
        if self.event_type == "inference" and self.is_initial is None:
            raise EventValidationError("inference events must carry is_initial")
        if self.event_type != "inference" and self.is_initial is not None:
            raise EventValidationError("only inference events carry is_initial")
        if self.timestamp.tzinfo is None:
            raise EventValidationError("timestamp must be timezone-aware")

    def to_json_dict(self) -> dict:
        return {
            "event_type": self.event_type,
            "owner_id": self.owner_id,
            "session_token": self.session_token,
            "is_initial": self.is_initial,
            "error_kind": self.error_kind,
            "timestamp": format_timestamp(self.timestamp),
            "is_staff": self.is_staff,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "UsageEvent":
        return cls(
            event_type=data["event_type"],
            owner_id=data["owner_id"],
            error_kind=data["error_kind"],
            timestamp=parse_timestamp(data["timestamp"]),
            session_token=data.get("session_token"),
            is_initial=data.get("is_initial"),
            is_staff=data.get("is_staff", False),
        )


def load_staff_ids(path: str | Path) -> set[str]:
    try:
        lines = Path(path).read_text().splitlines()
    except FileNotFoundError:
        return set()
    return {line.strip() for line in lines if line.strip()}


class EventLog:
    """Durable appender; safe under concurrent callers via a single writer lock."""

    def __init__(self, path: str | Path, staff_ids: set[str] | None = None):
        self.path = Path(path)
        self.staff_ids = staff_ids or set()
        self._lock = threading.Lock()

    def record(self, event: UsageEvent) -> None:
        event.is_staff = event.owner_id in self.staff_ids
        event.validate()
        line = json.dumps(event.to_json_dict()) + "\n"
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as handle:
                handle.write(line)
                handle.flush()
                os.fsync(handle.fileno())


def read_events(path: str | Path) -> Iterator[UsageEvent]:
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield UsageEvent.from_json_dict(json.loads(line))


def write_events(path: str | Path, events) -> None:
    """Bulk writer for generated logs; skips the per-record fsync."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        for event in events:
            event.validate()
            handle.write(json.dumps(event.to_json_dict()) + "\n")
