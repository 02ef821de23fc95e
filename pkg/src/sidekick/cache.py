"""Single-slot cache for the most recent error context.

Last error wins: the help commands always operate on the newest failure,
so one JSON file per account is enough. Writes go through a temp file and
an atomic rename so a concurrent compile can never expose a torn file.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from . import config
from .model import ErrorContext


def cache_context(ctx: ErrorContext, path: Path | None = None) -> Path:
    """Validate and persist ctx, replacing any previously cached context."""
    ctx.validate()
    target = path if path is not None else config.cache_file()
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=".last_error-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(ctx.dumps())
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def load_cached_context(path: Path | None = None) -> ErrorContext | None:
    """Return the cached context, or None when nothing has failed yet."""
    target = path if path is not None else config.cache_file()
    try:
        text = target.read_text()
    except FileNotFoundError:
        return None
    return ErrorContext.loads(text)


def save_help_handoff(fingerprint: str, explanation: str, guardrail: dict) -> Path:
    """Remember the in-terminal explanation so a later dashboard session
    for the same error continues the conversation instead of restarting."""
    target = config.help_handoff_file()
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "context_fingerprint": fingerprint,
        "explanation": explanation,
        "guardrail": guardrail,
    }
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=".last_help-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            json.dump(payload, handle, indent=2)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def load_help_handoff(fingerprint: str) -> dict | None:
    """Return the stored help explanation if it belongs to this context."""
    try:
        payload = json.loads(config.help_handoff_file().read_text())
    except (FileNotFoundError, json.JSONDecodeError):
        return None
    if payload.get("context_fingerprint") != fingerprint:
        return None
    return payload
