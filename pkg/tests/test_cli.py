"""dcc-help and dcc-sidekick command behavior."""

from __future__ import annotations

import json

import pytest

import sidekick.cli as cli
from sidekick.cache import cache_context, load_help_handoff
from sidekick.llm import MockBackend
from sidekick.telemetry.events import read_events

from conftest import make_compile_ctx, make_runtime_ctx


@pytest.fixture
def scripted_backend(monkeypatch):
    backend = MockBackend(script=["Look closely at line 3: something is unfinished."])
    monkeypatch.setattr(cli, "backend_from_env", lambda: backend)
    return backend


def test_help_prints_guarded_text_verbatim(scripted_backend, capsys, sidekick_env):
    cache_context(make_compile_ctx())
    assert cli.help_main([]) == 0
    out = capsys.readouterr().out
    assert "Look closely at line 3: something is unfinished.\n" in out


def test_help_without_cache_fails_with_message(capsys):
    assert cli.help_main([]) != 0
    assert "no recent error found" in capsys.readouterr().err


def test_help_logs_event_and_saves_handoff(scripted_backend, sidekick_env):
    ctx = make_compile_ctx()
    cache_context(ctx)
    cli.help_main([])
    events = list(read_events(sidekick_env / "events.ndjson"))
    assert [e.event_type for e in events] == ["help_used"]
    assert events[0].error_kind == "compile_time"
    handoff = load_help_handoff(ctx.fingerprint())
    assert handoff["explanation"].startswith("Look closely")


def test_help_runtime_prompt_contains_stack(scripted_backend, capsys):
    cache_context(make_runtime_ctx())
    assert cli.help_main([]) == 0
    sent = scripted_backend.requests[0]
    user_message = sent.messages[1].content
    assert "STACK" in user_message
    assert "main at crash.c:1" in user_message


def test_help_backend_failure_is_apologetic_nonzero(monkeypatch, capsys):
    cache_context(make_compile_ctx())

    def broken():
        from sidekick.llm import BackendError

        raise BackendError("unreachable")

    monkeypatch.setattr(cli, "backend_from_env", broken)
    assert cli.help_main([]) != 0
    assert "unavailable" in capsys.readouterr().err


def test_sidekick_prints_session_url(live_server, monkeypatch, capsys):
    monkeypatch.setenv("SIDEKICK_SERVER_URL", live_server.base_url)
    monkeypatch.setenv("SIDEKICK_USER", "alice")
    cache_context(make_compile_ctx())
    assert cli.sidekick_main([]) == 0
    out = capsys.readouterr().out
    assert f"{live_server.base_url}/session/" in out


def test_sidekick_json_launch_result(live_server, monkeypatch, capsys):
    monkeypatch.setenv("SIDEKICK_SERVER_URL", live_server.base_url)
    monkeypatch.setenv("SIDEKICK_USER", "alice")
    cache_context(make_compile_ctx())
    assert cli.sidekick_main(["--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["session_url"].endswith(payload["session_token"])
    assert payload["session_url"].startswith(live_server.base_url + "/session/")


def test_sidekick_twice_yields_distinct_tokens(live_server, monkeypatch, capsys):
    monkeypatch.setenv("SIDEKICK_SERVER_URL", live_server.base_url)
    monkeypatch.setenv("SIDEKICK_USER", "alice")
    cache_context(make_compile_ctx())
    cli.sidekick_main(["--json"])
    cli.sidekick_main(["--json"])
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.strip()]
    tokens = [json.loads(ln)["session_token"] for ln in lines]
    assert len(set(tokens)) == 2


def test_sidekick_does_not_generate_inference(live_server, monkeypatch, capsys):
    monkeypatch.setenv("SIDEKICK_SERVER_URL", live_server.base_url)
    monkeypatch.setenv("SIDEKICK_USER", "alice")
    cache_context(make_compile_ctx())
    before = len(live_server.backend.requests)
    payload_rc = cli.sidekick_main(["--json"])
    assert payload_rc == 0
    assert len(live_server.backend.requests) == before  # inference waits for the visit
    token = json.loads(capsys.readouterr().out)["session_token"]
    assert live_server.service.store.get_session(token)["visited"] == 0


def test_sidekick_without_cache_fails(capsys, monkeypatch):
    monkeypatch.setenv("SIDEKICK_SERVER_URL", "http://127.0.0.1:1")
    assert cli.sidekick_main([]) != 0
    assert "no recent error found" in capsys.readouterr().err


def test_sidekick_unreachable_service_message(monkeypatch, capsys):
    monkeypatch.setenv("SIDEKICK_SERVER_URL", "http://127.0.0.1:1")
    cache_context(make_compile_ctx())
    assert cli.sidekick_main([]) == 2
    assert "could not reach the sidekick server" in capsys.readouterr().err


def test_help_then_sidekick_continues_conversation(
    scripted_backend, live_server, monkeypatch, capsys
):
    monkeypatch.setenv("SIDEKICK_SERVER_URL", live_server.base_url)
    monkeypatch.setenv("SIDEKICK_USER", "alice")
    cache_context(make_compile_ctx())
    assert cli.help_main([]) == 0
    assert cli.sidekick_main(["--json"]) == 0
    out_lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("{")]
    token = json.loads(out_lines[-1])["session_token"]

    view = live_server.service.visit_session(token)
    assert view["turns"][0]["text"].startswith("Look closely at line 3")
    # the dashboard continues the terminal conversation, no regeneration
    assert all("system" != m.role for req in live_server.backend.requests for m in req.messages[1:])
