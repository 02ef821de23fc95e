"""Environment-driven configuration shared by the commands and the service."""

from __future__ import annotations

import os
from pathlib import Path

DEFAULT_SERVER_URL = "http://localhost:8000"
DEFAULT_OVERUSE_THRESHOLD = 6
DEFAULT_OVERUSE_WINDOW_MIN = 10


def cache_dir() -> Path:
    env = os.environ.get("SIDEKICK_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".sidekick"


def cache_file() -> Path:
    return cache_dir() / "last_error.json"


def help_handoff_file() -> Path:
    return cache_dir() / "last_help.json"


def server_url() -> str:
    return os.environ.get("SIDEKICK_SERVER_URL", DEFAULT_SERVER_URL).rstrip("/")


def event_log_path() -> Path:
    env = os.environ.get("SIDEKICK_EVENT_LOG")
    if env:
        return Path(env)
    return cache_dir() / "events.ndjson"


def staff_file() -> Path:
    return Path(os.environ.get("SIDEKICK_STAFF_FILE", "staff_ids.txt"))


def real_compiler() -> str:
    return os.environ.get("SIDEKICK_REAL_CC", "cc")


def overuse_threshold() -> int:
    return int(os.environ.get("SIDEKICK_OVERUSE_THRESHOLD", DEFAULT_OVERUSE_THRESHOLD))


def overuse_window_min() -> int:
    return int(os.environ.get("SIDEKICK_OVERUSE_WINDOW_MIN", DEFAULT_OVERUSE_WINDOW_MIN))
