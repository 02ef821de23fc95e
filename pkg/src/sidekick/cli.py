"""The two student-facing commands.

`dcc-help` prints a one-shot explanation of the most recent error straight
into the terminal. `dcc-sidekick` turns the same cached error into a web
session and prints its URL. Both read the single-slot cache and never
modify it, so they can be re-run and mixed freely on the same error.
"""

from __future__ import annotations

import argparse
import getpass
import json
import sys

import httpx

from . import config
from .cache import load_cached_context, load_help_handoff, save_help_handoff
from .explain import generate_initial
from .llm import BackendError, backend_from_env
from .telemetry.events import EventLog, UsageEvent, load_staff_ids
from .model import now_utc

NO_CACHE_MESSAGE = (
    "no recent error found: compile with sidekick-cc (or run with "
    "sidekick-run) first, then try again."
)

SERVICE_TIMEOUT_S = 10.0


def _owner_id() -> str:
    import os

    return os.environ.get("SIDEKICK_USER") or getpass.getuser()


def _log_event(event_type: str, error_kind: str, token: str | None = None) -> None:
    # Telemetry must never break the student-facing path.
    try:
        log = EventLog(config.event_log_path(), load_staff_ids(config.staff_file()))
        log.record(
            UsageEvent(
                event_type=event_type,
                owner_id=_owner_id(),
                error_kind=error_kind,
                timestamp=now_utc(),
                session_token=token,
            )
        )
    except Exception as exc:  # noqa: BLE001
        print(f"(warning: could not record usage event: {exc})", file=sys.stderr)


def help_main(argv: list[str] | None = None) -> int:
    argparse.ArgumentParser(
        prog="dcc-help",
        description="Explain the most recent compile or run-time error in the terminal.",
    ).parse_args(argv)

    ctx = load_cached_context()
    if ctx is None:
        print(NO_CACHE_MESSAGE, file=sys.stderr)
        return 1
    try:
        backend = backend_from_env()
        text, outcome = generate_initial(ctx, backend)
    except BackendError as exc:
        print(
            "sorry, the explanation service is unavailable right now "
            f"({exc}); please try again shortly.",
            file=sys.stderr,
        )
        return 2
    print(text)
    _log_event("help_used", ctx.kind)
    save_help_handoff(ctx.fingerprint(), text, outcome.to_json_dict())
    return 0


def sidekick_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dcc-sidekick",
        description="Open a conversational web session about the most recent error.",
    )
    parser.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    args = parser.parse_args(argv)

    ctx = load_cached_context()
    if ctx is None:
        print(NO_CACHE_MESSAGE, file=sys.stderr)
        return 1

    payload = ctx.to_json_dict()
    payload["owner_id"] = _owner_id()
    handoff = load_help_handoff(ctx.fingerprint())
    if handoff:
        payload["seed_assistant_text"] = handoff["explanation"]
        payload["seed_guardrail"] = handoff.get("guardrail")

    base = config.server_url()
    try:
        response = httpx.post(
            f"{base}/api/sessions", json=payload, timeout=SERVICE_TIMEOUT_S
        )
        response.raise_for_status()
        body = response.json()
    except (httpx.HTTPError, ValueError) as exc:
        print(
            f"could not reach the sidekick server at {base} ({exc}); "
            "check SIDEKICK_SERVER_URL and try again.",
            file=sys.stderr,
        )
        return 2

    if args.json:
        print(json.dumps({"session_url": body["url"], "session_token": body["token"]}))
    else:
        print("Your sidekick session is ready: open")
        print(f"  {body['url']}")
        print("in a browser to explore this error and ask follow-up questions.")
    return 0
