"""Acceptance suite: one test per acceptance criterion, each printing an
explicit pass line (run with `pytest tests/test_acceptance.py -v -s`).

Everything here is offline: the only processes touched are the local C
compiler, gdb, and a uvicorn server on a loopback port backed by the
scripted mock."""

from __future__ import annotations

import json
import random
import shutil
import threading
import time
from datetime import date

import httpx
import pytest

import sidekick.cli as cli
from sidekick.compiler import main as cc_main, wrap_compile
from sidekick.guardrails import apply_guardrails, contains_code_block
from sidekick.llm import BackendError, CompletionResult, MockBackend
from sidekick.model import ErrorContext
from sidekick.runner import run_with_capture
from sidekick.cache import load_cached_context

from conftest import FIXTURES, make_compile_ctx, make_service, needs_cc, needs_gdb
from test_diagnostics import corpus_accuracy, corpus_entries
from test_guardrails import PINNED_REWRITE_PROMPT
from test_redaction import oracle_has_comment

C_DIR = FIXTURES / "c"


def _pass(line: str) -> None:
    print(f"\nACCEPTANCE PASS: {line}")


# -- criterion: end-to-end compile-time flow ------------------------------------


@needs_cc
def test_compile_time_flow_end_to_end(live_server, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("SIDEKICK_SERVER_URL", live_server.base_url)
    monkeypatch.setenv("SIDEKICK_USER", "student1")
    shutil.copy(C_DIR / "missing_semicolon.c", tmp_path / "missing_semicolon.c")
    live_server.backend.script[:] = [
        "A semicolon is missing near the declaration.",
        "Look at the line right before the one the compiler names.",
    ]

    started = time.monotonic()

    rc = cc_main(["missing_semicolon.c", "-o", "prog"])
    assert rc != 0
    assert load_cached_context() is not None

    assert cli.sidekick_main(["--json"]) == 0

    # recover the token from the service itself (single session)
    with live_server.service.store._connect() as conn:
        token = conn.execute("SELECT token FROM sessions").fetchone()["token"]

    view = httpx.get(f"{live_server.base_url}/api/sessions/{token}", timeout=5).json()
    assert [t["role"] for t in view["turns"]] == ["assistant"]
    assert view["turns"][0]["text"] == "A semicolon is missing near the declaration."

    reply = httpx.post(
        f"{live_server.base_url}/api/sessions/{token}/messages",
        json={"text": "which line should I fix?"},
        timeout=5,
    )
    assert reply.status_code == 200
    view = httpx.get(f"{live_server.base_url}/api/sessions/{token}", timeout=5).json()
    assert [t["role"] for t in view["turns"]] == ["assistant", "user", "assistant"]
    assert live_server.backend.script == []  # exactly one initial + one follow-up inference

    elapsed = time.monotonic() - started
    assert elapsed < 2.0, f"flow took {elapsed:.2f}s"
    _pass(f"compile-time flow: broken fixture to 3-turn session in {elapsed:.2f}s, offline")


# -- criterion: end-to-end run-time flow -----------------------------------------


@needs_gdb
def test_runtime_flow_stack_and_locals_reach_the_prompt(live_server, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("SIDEKICK_SERVER_URL", live_server.base_url)
    monkeypatch.setenv("SIDEKICK_USER", "student2")
    shutil.copy(C_DIR / "null_deref.c", tmp_path / "null_deref.c")

    outcome = wrap_compile(["null_deref.c"], ["-o", "prog"])
    assert outcome.ok, outcome.stderr
    result = run_with_capture(tmp_path / "prog", cwd=tmp_path)
    assert not result.ok

    ctx = load_cached_context()
    assert ctx is not None and ctx.kind == "run_time"
    assert [f.function_name for f in ctx.stack] == ["read_first", "main"]

    assert cli.sidekick_main(["--json"]) == 0
    with live_server.service.store._connect() as conn:
        token = conn.execute(
            "SELECT token FROM sessions ORDER BY created_at DESC"
        ).fetchone()["token"]
    httpx.get(f"{live_server.base_url}/api/sessions/{token}", timeout=5)

    initial_requests = [r for r in live_server.backend.requests if len(r.messages) == 2]
    assert initial_requests, "no initial prompt reached the mock"
    prompt = initial_requests[-1].messages[1].content
    assert "read_first" in prompt and "main" in prompt
    bindings = [b for f in ctx.stack for b in f.locals]
    assert bindings, "no locals were captured"
    for binding in bindings:
        assert binding.name in prompt
        assert binding.value_repr in prompt
    _pass(
        "run-time flow: 2-frame chain innermost-first, "
        f"{len(bindings)} captured locals all present in the initial prompt"
    )


# -- criterion: guardrail invariant over a fuzz corpus ----------------------------


def test_guardrail_invariant_over_fuzz_corpus():
    rng = random.Random(20_240_722)
    pieces = [
        "```", "``", "`", "```c\nint x = 0;\n", "\n```\n", "use a loop",
        "check the bound", "``````", "```py\nprint()\n```", "\n", " ", "ok",
        "fix line 4", "✓ done",
    ]

    class Hostile:
        """Rewrites randomly echo, add fences, or fail outright."""

        def chat(self, req):
            roll = rng.random()
            if roll < 0.25:
                raise BackendError("no")
            if roll < 0.6:
                return CompletionResult(text="```c\nforced code\n```")
            return CompletionResult(text=req.messages[-1].content)

    hostile = Hostile()
    candidates = [
        "".join(rng.choices(pieces, k=rng.randrange(0, 14))) for _ in range(1100)
    ]
    clean = fenced = 0
    for candidate in candidates:
        final, outcome = apply_guardrails(candidate, hostile)
        assert not contains_code_block(final), repr((candidate, final))
        if outcome.code_block_detected:
            fenced += 1
        else:
            clean += 1
            assert final == candidate  # byte-identical pass-through
    assert clean and fenced  # the corpus exercised both paths
    _pass(
        f"guardrails: {len(candidates)} fuzzed candidates ({fenced} with fences), "
        "zero fenced blocks in any final output"
    )


# -- criterion: rewrite-prompt fidelity --------------------------------------------


def test_rewrite_system_prompt_fidelity():
    mock = MockBackend(script=["explained without code"])
    apply_guardrails("look:\n```c\nint x;\n```", mock)
    sent = mock.requests[0].messages[0]
    assert sent.role == "system"
    assert sent.content == PINNED_REWRITE_PROMPT
    _pass("rewrite prompt sent to the backend is byte-identical to the pinned text")


# -- criterion: diagnostic parser corpus -------------------------------------------


def test_diagnostic_corpus_accuracy():
    entries = corpus_entries()
    matched, total, mismatches = corpus_accuracy()
    assert len(entries) >= 40
    accuracy = matched / total
    assert accuracy >= 0.95, mismatches
    _pass(
        f"diagnostic corpus: {matched}/{total} annotated diagnostics parsed "
        f"correctly across {len(entries)} real compiler outputs ({accuracy:.1%})"
    )


# -- criterion: redaction ------------------------------------------------------------


def test_redaction_properties_over_fuzzed_sources():
    from sidekick.telemetry.redact import redact_source

    rng = random.Random(99)
    literals = ['"// keep"', "'/'", '"/* keep */"', '"a\\"b"', "'\\''"]
    bounded = [
        "int x = 1;\n", "// drop me\n", "/* drop\nme */", "y /= 2;\n",
        "// cont \\\n line\n", "\n",
    ]
    for _ in range(800):
        kept = rng.choices(literals, k=rng.randrange(0, 4))
        parts = kept + rng.choices(bounded, k=rng.randrange(0, 8))
        rng.shuffle(parts)
        if rng.random() < 0.3:
            # an unterminated block comment legitimately swallows to EOF,
            # so it can only ever come after the literals that must survive
            parts.append("/* unterminated")
        source = " ".join(parts)
        redacted = redact_source(source)
        assert not oracle_has_comment(redacted)
        assert redact_source(redacted) == redacted
        for literal in kept:
            assert literal in redacted  # literals byte-exact
    _pass("redaction: 800 fuzzed sources, comment-free per oracle, literals intact, idempotent")


# -- criterion: metrics replication ---------------------------------------------------


def test_metrics_replication_from_synthetic_log():
    from sidekick.telemetry.metrics import compute_metrics
    from sidekick.telemetry.synth import generate_synthetic_log

    started = time.monotonic()
    events = generate_synthetic_log(term_start=date(2025, 6, 2), tz="Australia/Sydney")
    report = compute_metrics(events, tz="Australia/Sydney", term_start=date(2025, 6, 2))
    elapsed = time.monotonic() - started

    assert report.unique_users == 959
    assert report.total_sessions == 11_222
    assert report.total_inferences == 17_982
    assert report.sessions_per_student == pytest.approx(11.7, abs=0.05)
    assert report.avg_followups_overall == pytest.approx(0.6, abs=0.05)
    assert report.pct_never_visited == pytest.approx(12.5, abs=0.1)
    assert report.pct_business_hours == pytest.approx(44.0, abs=0.5)
    assert report.pct_out_of_hours == pytest.approx(56.0, abs=0.5)
    assert report.pct_multi_inference == pytest.approx(25.6, abs=0.5)
    assert report.pct_multi_inference_compile == pytest.approx(22.7, abs=0.5)
    assert report.pct_multi_inference_runtime == pytest.approx(35.4, abs=0.5)
    assert elapsed < 10.0
    assert len(report.weekly_timeline) == 7
    _pass(
        "metrics replication: 12,825-session synthetic log matches every "
        f"published aggregate within tolerance in {elapsed:.2f}s"
    )


# -- criterion: session invariants under randomized operations -------------------------


def _assert_alternation(turns):
    roles = [t["role"] for t in turns]
    if roles:
        assert roles[0] == "assistant"
    for i in range(1, len(roles)):
        assert roles[i] != roles[i - 1], f"two {roles[i]} turns in a row"


def test_session_invariants_random_operations(tmp_path):
    backend = MockBackend(responder=lambda req: "guidance without code")
    service = make_service(tmp_path, backend=backend)
    rng = random.Random(4242)

    tokens: list[str] = []
    shares: dict[str, str] = {}
    expected: dict[str, dict] = {}
    ops = 0

    def random_token():
        return rng.choice(tokens)

    for _ in range(10_500):
        ops += 1
        action = rng.random()
        if action < 0.18 or not tokens:
            created = service.create_session(make_compile_ctx(), f"u{rng.randrange(40)}")
            tokens.append(created["token"])
            expected[created["token"]] = {"visited": False, "followups": 0}
        elif action < 0.45:
            token = random_token()
            view = service.visit_session(token)
            expected[token]["visited"] = True
            _assert_alternation(view["turns"])
        elif action < 0.65:
            token = random_token()
            state = expected[token]
            try:
                service.post_message(token, f"q{ops}")
            except Exception:
                assert not state["visited"]
            else:
                assert state["visited"]
                state["followups"] += 1
        elif action < 0.8:
            token = random_token()
            shares[service.create_share_link(token)["share_token"]] = token
        elif action < 0.9 and shares:
            share_token = rng.choice(list(shares))
            view = service.visit_session(share_token)
            assert view["can_post"] is False
            _assert_alternation(view["turns"])
        elif shares:
            share_token = rng.choice(list(shares))
            try:
                service.post_message(share_token, "should be rejected")
            except Exception as exc:
                assert type(exc).__name__ == "ForbiddenError"
            else:
                raise AssertionError("share token was allowed to post")

    # every generation visible in sessions: one initial per visited session,
    # plus one per follow-up; responder never returns fences so no rewrites
    initial_requests = sum(1 for r in backend.requests if len(r.messages) == 2)
    followup_requests = sum(1 for r in backend.requests if len(r.messages) > 2)
    visited_sessions = sum(1 for s in expected.values() if s["visited"])
    assert initial_requests == visited_sessions
    assert followup_requests == sum(s["followups"] for s in expected.values())

    # final sweep over the raw store (no mutation): alternation and the
    # exact expected turn count for every session
    for token in tokens:
        state = expected[token]
        turns = [
            {"role": t["role"]} for t in service.store.get_turns(token)
        ]
        _assert_alternation(turns)
        expected_len = 1 + 2 * state["followups"] if state["visited"] else 0
        assert len(turns) == expected_len

    # concurrent first-visit race: exactly one inference
    race_backend = MockBackend(responder=lambda req: "raced once")
    race_service = make_service(tmp_path / "race", backend=race_backend)
    race_token = race_service.create_session(make_compile_ctx(), "racer")["token"]
    threads = [
        threading.Thread(target=race_service.visit_session, args=(race_token,))
        for _ in range(24)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(race_backend.requests) == 1
    assert len(race_service.visit_session(race_token)["turns"]) == 1

    _pass(
        f"session invariants: {ops} randomized operations across {len(tokens)} sessions, "
        "alternation, single initial inference and read-only shares all held"
    )
