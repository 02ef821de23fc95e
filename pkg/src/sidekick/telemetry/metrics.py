"""Aggregate usage events into the adoption metrics report.

Definitions used throughout (staff events are excluded before anything is
counted):

* A session *counts* once it has been visited in the browser (a "launch");
  created-but-never-opened sessions only feed pct_never_visited, whose
  denominator is created sessions.
* A follow-up is any non-initial inference within a session.
* The business-hours split is computed over session-visit events, with
  business = [09:00, 17:00) local time and late night = [00:00, 06:00).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Iterable
from zoneinfo import ZoneInfo

from ..model import COMPILE_TIME, RUN_TIME
from .events import UsageEvent

BUSINESS_START_HOUR = 9
BUSINESS_END_HOUR = 17
LATE_NIGHT_END_HOUR = 6


def classify_hours(timestamp: datetime, tz: str | ZoneInfo) -> tuple[str, bool]:
    """Classify one timestamp: ("business" | "out_of_hours", late_night)."""
    zone = ZoneInfo(tz) if isinstance(tz, str) else tz
    local = timestamp.astimezone(zone)
    business = BUSINESS_START_HOUR <= local.hour < BUSINESS_END_HOUR
    late_night = local.hour < LATE_NIGHT_END_HOUR
    return ("business" if business else "out_of_hours", late_night)


@dataclass
class WeekCounts:
    week: int
    compile_time: int = 0
    run_time: int = 0

    @property
    def total(self) -> int:
        return self.compile_time + self.run_time


@dataclass
class MetricsReport:
    unique_users: int = 0
    total_sessions: int = 0  # visited sessions (launches)
    total_created_sessions: int = 0
    total_inferences: int = 0
    sessions_per_student: float | None = None
    pct_multi_inference: float | None = None
    pct_multi_inference_compile: float | None = None
    pct_multi_inference_runtime: float | None = None
    avg_followups_overall: float | None = None
    avg_followups_conditional: float | None = None
    pct_never_visited: float | None = None
    pct_business_hours: float | None = None
    pct_out_of_hours: float | None = None
    pct_midnight_to_6am: float | None = None
    weekly_timeline: list[WeekCounts] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "unique_users": self.unique_users,
            "total_sessions": self.total_sessions,
            "total_created_sessions": self.total_created_sessions,
            "total_inferences": self.total_inferences,
            "sessions_per_student": self.sessions_per_student,
            "pct_multi_inference": self.pct_multi_inference,
            "pct_multi_inference_compile": self.pct_multi_inference_compile,
            "pct_multi_inference_runtime": self.pct_multi_inference_runtime,
            "avg_followups_overall": self.avg_followups_overall,
            "avg_followups_conditional": self.avg_followups_conditional,
            "pct_never_visited": self.pct_never_visited,
            "pct_business_hours": self.pct_business_hours,
            "pct_out_of_hours": self.pct_out_of_hours,
            "pct_midnight_to_6am": self.pct_midnight_to_6am,
            "weekly_timeline": [
                {
                    "week": w.week,
                    "compile_time": w.compile_time,
                    "run_time": w.run_time,
                    "total": w.total,
                }
                for w in self.weekly_timeline
            ],
        }


def compute_metrics(
    events: Iterable[UsageEvent],
    tz: str | ZoneInfo = "UTC",
    term_start: date | None = None,
) -> MetricsReport:
    """Fold a (possibly huge) event stream into one MetricsReport."""
    zone = ZoneInfo(tz) if isinstance(tz, str) else tz

    owners: set[str] = set()
    created_tokens: set[str] = set()
    visited_tokens: set[str] = set()
    session_kind: dict[str, str] = {}
    inference_counts: dict[str, int] = {}
    total_inferences = 0
    visit_business = visit_out = visit_late = 0
    weekly: dict[int, WeekCounts] = {}

    for event in events:
        if event.is_staff:
            continue
        token = event.session_token
        if token and event.error_kind and token not in session_kind:
            session_kind[token] = event.error_kind
        if event.event_type == "session_created":
            owners.add(event.owner_id)
            if token:
                created_tokens.add(token)
        elif event.event_type == "session_visited":
            if token and token in visited_tokens:
                continue  # only the first visit counts
            if token:
                visited_tokens.add(token)
            bucket, late = classify_hours(event.timestamp, zone)
            if bucket == "business":
                visit_business += 1
            else:
                visit_out += 1
            if late:
                visit_late += 1
            if term_start is not None:
                local_day = event.timestamp.astimezone(zone).date()
                week = (local_day - term_start).days // 7 + 1
                counts = weekly.setdefault(week, WeekCounts(week=week))
                if session_kind.get(token) == RUN_TIME:
                    counts.run_time += 1
                else:
                    counts.compile_time += 1
        elif event.event_type == "inference":
            total_inferences += 1
            if token:
                inference_counts[token] = inference_counts.get(token, 0) + 1

    report = MetricsReport(
        unique_users=len(owners),
        total_sessions=len(visited_tokens),
        total_created_sessions=len(created_tokens),
        total_inferences=total_inferences,
    )

    if owners:
        report.sessions_per_student = report.total_sessions / len(owners)

    conversations = len(inference_counts)
    multi_tokens = [t for t, n in inference_counts.items() if n >= 2]
    if conversations:
        report.pct_multi_inference = 100.0 * len(multi_tokens) / conversations
        followups = total_inferences - conversations
        report.avg_followups_overall = followups / conversations
        if multi_tokens:
            report.avg_followups_conditional = followups / len(multi_tokens)
    for kind, attr in ((COMPILE_TIME, "pct_multi_inference_compile"), (RUN_TIME, "pct_multi_inference_runtime")):
        kind_tokens = [t for t in inference_counts if session_kind.get(t) == kind]
        if kind_tokens:
            multi = sum(1 for t in kind_tokens if inference_counts[t] >= 2)
            setattr(report, attr, 100.0 * multi / len(kind_tokens))

    if created_tokens:
        never = len(created_tokens - visited_tokens)
        report.pct_never_visited = 100.0 * never / len(created_tokens)

    total_visits = visit_business + visit_out
    if total_visits:
        report.pct_business_hours = 100.0 * visit_business / total_visits
        report.pct_out_of_hours = 100.0 - report.pct_business_hours
        report.pct_midnight_to_6am = 100.0 * visit_late / total_visits

    report.weekly_timeline = [weekly[w] for w in sorted(weekly)]
    return report


def _fmt(value: float | None, digits: int = 2, suffix: str = "") -> str:
    if value is None:
        return "n/a"
    return f"{value:.{digits}f}{suffix}"


def render_markdown(report: MetricsReport) -> str:
    lines = [
        "# Usage metrics",
        "",
        "| metric | value |",
        "| --- | --- |",
        f"| unique users | {report.unique_users} |",
        f"| sessions (visited) | {report.total_sessions} |",
        f"| sessions created | {report.total_created_sessions} |",
        f"| inferences | {report.total_inferences} |",
        f"| sessions per student | {_fmt(report.sessions_per_student)} |",
        f"| multi-inference sessions | {_fmt(report.pct_multi_inference, 1, '%')} |",
        f"| multi-inference (compile-time) | {_fmt(report.pct_multi_inference_compile, 1, '%')} |",
        f"| multi-inference (run-time) | {_fmt(report.pct_multi_inference_runtime, 1, '%')} |",
        f"| avg follow-ups per starting message | {_fmt(report.avg_followups_overall)} |",
        f"| avg follow-ups when any | {_fmt(report.avg_followups_conditional)} |",
        f"| never visited | {_fmt(report.pct_never_visited, 1, '%')} |",
        f"| business hours | {_fmt(report.pct_business_hours, 1, '%')} |",
        f"| out of hours | {_fmt(report.pct_out_of_hours, 1, '%')} |",
        f"| midnight to 6am | {_fmt(report.pct_midnight_to_6am, 1, '%')} |",
    ]
    if report.weekly_timeline:
        lines += [
            "",
            "## Sessions per week",
            "",
            "| week | compile-time | run-time | total |",
            "| --- | --- | --- | --- |",
        ]
        for w in report.weekly_timeline:
            lines.append(f"| {w.week} | {w.compile_time} | {w.run_time} | {w.total} |")
    return "\n".join(lines) + "\n"
