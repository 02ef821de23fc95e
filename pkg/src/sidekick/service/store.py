"""SQLite persistence for sessions, turns and share links.

Single-node embedded store; every method opens a short-lived connection so
concurrent handler threads never share one. WAL mode plus a generous busy
timeout handles writer contention at this scale.
"""

from __future__ import annotations

import sqlite3
import threading
from pathlib import Path

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    token TEXT PRIMARY KEY,
    owner_id TEXT NOT NULL,
    context_json TEXT NOT NULL,
    visited INTEGER NOT NULL DEFAULT 0,
    created_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_sessions_owner_created ON sessions (owner_id, created_at);
CREATE TABLE IF NOT EXISTS turns (
    session_token TEXT NOT NULL,
    idx INTEGER NOT NULL,
    role TEXT NOT NULL,
    text TEXT NOT NULL,
    guardrail_json TEXT,
    status TEXT NOT NULL DEFAULT 'ok',
    created_at TEXT NOT NULL,
    PRIMARY KEY (session_token, idx)
);
CREATE TABLE IF NOT EXISTS shares (
    share_token TEXT PRIMARY KEY,
    session_token TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_shares_session ON shares (session_token);
"""


class Store:
    def __init__(self, db_path: str | Path):
        self.db_path = str(db_path)
        self._local = threading.local()
        parent = Path(self.db_path).parent
        if parent and str(parent) not in (".", ""):
            parent.mkdir(parents=True, exist_ok=True)
        with self._connect() as conn:
            conn.executescript(_SCHEMA)

    def _connect(self) -> sqlite3.Connection:
        # one connection per thread per store: no cross-thread sharing,
        # no per-call connection setup cost
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = sqlite3.connect(self.db_path, timeout=30)
            conn.row_factory = sqlite3.Row
            conn.execute("PRAGMA journal_mode=WAL")
            self._local.conn = conn
        return conn

    # -- sessions ---------------------------------------------------------

    def create_session(self, token: str, owner_id: str, context_json: str, created_at: str) -> None:
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO sessions (token, owner_id, context_json, visited, created_at) "
                "VALUES (?, ?, ?, 0, ?)",
                (token, owner_id, context_json, created_at),
            )

    def get_session(self, token: str):
        with self._connect() as conn:
            return conn.execute("SELECT * FROM sessions WHERE token = ?", (token,)).fetchone()

    def mark_visited(self, token: str) -> None:
        with self._connect() as conn:
            conn.execute("UPDATE sessions SET visited = 1 WHERE token = ?", (token,))

    def count_sessions_since(self, owner_id: str, since_iso: str) -> int:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT COUNT(*) AS n FROM sessions WHERE owner_id = ? AND created_at >= ?",
                (owner_id, since_iso),
            ).fetchone()
            return row["n"]

    # -- turns ------------------------------------------------------------

    def get_turns(self, token: str) -> list[sqlite3.Row]:
        with self._connect() as conn:
            return conn.execute(
                "SELECT * FROM turns WHERE session_token = ? ORDER BY idx", (token,)
            ).fetchall()

    def append_turn(
        self,
        token: str,
        idx: int,
        role: str,
        text: str,
        guardrail_json: str | None,
        status: str,
        created_at: str,
    ) -> None:
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO turns (session_token, idx, role, text, guardrail_json, status, created_at) "
                "VALUES (?, ?, ?, ?, ?, ?, ?)",
                (token, idx, role, text, guardrail_json, status, created_at),
            )

    def replace_turn(
        self,
        token: str,
        idx: int,
        text: str,
        guardrail_json: str | None,
        status: str,
        created_at: str,
    ) -> None:
        with self._connect() as conn:
            conn.execute(
                "UPDATE turns SET text = ?, guardrail_json = ?, status = ?, created_at = ? "
                "WHERE session_token = ? AND idx = ?",
                (text, guardrail_json, status, created_at, token, idx),
            )

    # -- shares -----------------------------------------------------------

    def add_share(self, share_token: str, session_token: str, created_at: str) -> None:
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO shares (share_token, session_token, created_at) VALUES (?, ?, ?)",
                (share_token, session_token, created_at),
            )

    def resolve_share(self, share_token: str) -> str | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT session_token FROM shares WHERE share_token = ?", (share_token,)
            ).fetchone()
            return row["session_token"] if row else None

    def share_tokens(self, session_token: str) -> list[str]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT share_token FROM shares WHERE session_token = ? ORDER BY created_at",
                (session_token,),
            ).fetchall()
            return [r["share_token"] for r in rows]
