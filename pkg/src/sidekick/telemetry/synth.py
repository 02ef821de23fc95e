"""Synthetic usage-log generator.

Produces an event log whose aggregate shape matches a configurable set of
published-scale targets (users, sessions, inference totals, never-visited
rate, hour split, multi-inference rates). Useful for exercising the report
pipeline at realistic volume and for verifying the metric definitions
against known aggregates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from zoneinfo import ZoneInfo

from ..model import COMPILE_TIME, RUN_TIME
from .events import UsageEvent

DEFAULT_TERM_START = date(2025, 6, 2)  # a Monday
DEFAULT_TZ = "Australia/Sydney"


@dataclass
class SynthTargets:
    users: int = 959
    visited_sessions: int = 11_222
    total_inferences: int = 17_982
    pct_never_visited: float = 12.5
    pct_multi_overall: float = 25.6
    pct_multi_compile: float = 22.7
    pct_multi_runtime: float = 35.4
    pct_business: float = 44.0
    pct_late_night: float = 10.0
    weeks: int = 7
    staff_sessions: int = 40


# Cosmetic weekly shape: compile-heavy early, run-time growing later.
_COMPILE_WEEK_WEIGHTS = [16, 15, 14, 15, 13, 14, 13]
_RUNTIME_WEEK_WEIGHTS = [4, 6, 9, 13, 17, 25, 26]


def _week_weights(base: list[int], weeks: int) -> list[int]:
    if weeks <= len(base):
        return base[:weeks]
    return base + [base[-1]] * (weeks - len(base))


def generate_synthetic_log(
    targets: SynthTargets | None = None,
    term_start: date = DEFAULT_TERM_START,
    tz: str = DEFAULT_TZ,
    seed: int = 20_250_602,
) -> list[UsageEvent]:
    t = targets or SynthTargets()
    rng = random.Random(seed)
    zone = ZoneInfo(tz)

    visited_n = t.visited_sessions
    created_n = round(visited_n / (1 - t.pct_never_visited / 100.0))
    never_n = created_n - visited_n

    # Split visited sessions by kind so the per-kind multi-inference rates
    # reproduce the overall one.
    if t.pct_multi_compile != t.pct_multi_runtime:
        frac_compile = (t.pct_multi_overall - t.pct_multi_runtime) / (
            t.pct_multi_compile - t.pct_multi_runtime
        )
    else:
        frac_compile = 0.5
    compile_n = round(visited_n * frac_compile)
    runtime_n = visited_n - compile_n
    multi_compile = round(compile_n * t.pct_multi_compile / 100.0)
    multi_runtime = round(runtime_n * t.pct_multi_runtime / 100.0)

    followups_total = t.total_inferences - visited_n
    multi_total = multi_compile + multi_runtime
    if followups_total < multi_total:
        raise ValueError("targets need at least one follow-up per multi-inference session")

    owners = [f"u{idx:04d}" for idx in range(1, t.users + 1)]

    # kind / multi flags for visited sessions, shuffled together
    kinds = [COMPILE_TIME] * compile_n + [RUN_TIME] * runtime_n
    multi_flags = (
        [True] * multi_compile
        + [False] * (compile_n - multi_compile)
        + [True] * multi_runtime
        + [False] * (runtime_n - multi_runtime)
    )
    order = list(range(visited_n))
    rng.shuffle(order)
    kinds = [kinds[i] for i in order]
    multi_flags = [multi_flags[i] for i in order]

    # follow-up counts: every multi session gets one, the surplus is
    # sprinkled over the multi sessions at random
    followups = [1 if flag else 0 for flag in multi_flags]
    multi_indices = [i for i, flag in enumerate(multi_flags) if flag]
    for _ in range(followups_total - multi_total):
        followups[rng.choice(multi_indices)] += 1

    # visit-time windows hitting the business / late-night quotas exactly
    business_q = round(visited_n * t.pct_business / 100.0)
    late_q = round(visited_n * t.pct_late_night / 100.0)
    windows = ["business"] * business_q + ["late"] * late_q
    windows += ["other"] * (visited_n - len(windows))
    rng.shuffle(windows)

    compile_weeks = _week_weights(_COMPILE_WEEK_WEIGHTS, t.weeks)
    runtime_weeks = _week_weights(_RUNTIME_WEEK_WEIGHTS, t.weeks)
    week_range = list(range(t.weeks))

    def visit_moment(window: str, kind: str) -> datetime:
        weights = compile_weeks if kind == COMPILE_TIME else runtime_weeks
        week = rng.choices(week_range, weights=weights)[0]
        day = rng.randrange(7)
        if window == "business":
            hour = rng.randrange(9, 17)
        elif window == "late":
            hour = rng.randrange(0, 6)
        else:
            hour = rng.choice([6, 7, 8] + list(range(17, 24)))
        local_day = term_start + timedelta(days=week * 7 + day)
        local = datetime(
            local_day.year, local_day.month, local_day.day,
            hour, rng.randrange(60), rng.randrange(60), tzinfo=zone,
        )
        return local.astimezone(ZoneInfo("UTC"))

    events: list[UsageEvent] = []
    seq = 0

    def emit(event: UsageEvent):
        nonlocal seq
        events.append(event)
        seq += 1

    token_no = 0
    for i in range(visited_n):
        token_no += 1
        token = f"s{token_no:06d}"
        owner = owners[i % len(owners)]
        kind = kinds[i]
        visit_at = visit_moment(windows[i], kind)
        created_at = visit_at - timedelta(seconds=rng.randrange(10, 600))
        emit(UsageEvent("session_created", owner, kind, created_at, session_token=token))
        emit(UsageEvent("session_visited", owner, kind, visit_at, session_token=token))
        at = visit_at + timedelta(seconds=rng.randrange(2, 9))
        emit(UsageEvent("inference", owner, kind, at, session_token=token, is_initial=True))
        for _ in range(followups[i]):
            at += timedelta(seconds=rng.randrange(30, 300))
            emit(UsageEvent("inference", owner, kind, at, session_token=token, is_initial=False))

    never_compile = round(never_n * (compile_n / visited_n)) if visited_n else 0
    for j in range(never_n):
        token_no += 1
        token = f"s{token_no:06d}"
        owner = owners[(visited_n + j) % len(owners)]
        kind = COMPILE_TIME if j < never_compile else RUN_TIME
        created_at = visit_moment(rng.choice(["business", "other"]), kind)
        emit(UsageEvent("session_created", owner, kind, created_at, session_token=token))

    # staff usage that data filtering must remove
    for k in range(t.staff_sessions):
        token_no += 1
        token = f"s{token_no:06d}"
        owner = f"staff{k % 7:02d}"
        kind = COMPILE_TIME if k % 2 else RUN_TIME
        visit_at = visit_moment("business", kind)
        for ev_type, extra in (
            ("session_created", {}),
            ("session_visited", {}),
            ("inference", {"is_initial": True}),
        ):
            emit(
                UsageEvent(
                    ev_type, owner, kind, visit_at, session_token=token,
                    is_staff=True, **extra,
                )
            )
            visit_at += timedelta(seconds=3)

    indexed = list(enumerate(events))
    indexed.sort(key=lambda pair: (pair[1].timestamp, pair[0]))
    return [event for _, event in indexed]
