"""Session lifecycle: creation, first-visit explanation, follow-ups, shares.

Per-session mutations are serialized through a per-token lock, so a stampede
of first visits still produces exactly one initial explanation and posted
turns never interleave. The store is the single source of truth; this layer
holds no session state of its own.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .. import explain
from ..guardrails import GuardrailOutcome
from ..llm import BackendError
from ..model import ErrorContext, format_timestamp, now_utc
from ..telemetry.events import EventLog, UsageEvent
from .store import Store

OVERUSE_REMINDER = (
    "A gentle reminder: you have opened quite a few AI help sessions in a "
    "short time. Take care not to lean on this assistant too heavily, as AI "
    "assistance will not be available in the final exam."
)


class NotFoundError(Exception):
    """No session or share resolves to this token."""


class ForbiddenError(Exception):
    """The caller's token does not allow this operation (read-only share)."""


class RequestValidationError(Exception):
    """The request is well-addressed but its content is not acceptable."""


@dataclass
class OveruseStatus:
    warn: bool
    recent_session_count: int
    window_minutes: int


def _new_token() -> str:
    return secrets.token_urlsafe(32)  # 256 bits, URL-safe


class SessionService:
    def __init__(
        self,
        store: Store,
        llm,
        base_url: str = "http://localhost:8000",
        events: EventLog | None = None,
        overuse_threshold: int = 6,
        overuse_window_min: int = 10,
        clock=now_utc,
    ):
        self.store = store
        self.llm = llm
        self.base_url = base_url.rstrip("/")
        self.events = events
        self.overuse_threshold = overuse_threshold
        self.overuse_window_min = overuse_window_min
        self.clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- plumbing ---------------------------------------------------------

    def _lock_for(self, token: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(token, threading.Lock())

    def _emit(self, event_type: str, owner_id: str, kind: str, token: str | None,
              is_initial: bool | None = None) -> None:
        if self.events is None:
            return
        self.events.record(
            UsageEvent(
                event_type=event_type,
                owner_id=owner_id,
                error_kind=kind,
                timestamp=self.clock(),
                session_token=token,
                is_initial=is_initial,
            )
        )

    def _resolve(self, token: str):
        """Map a full or share token to (session_row, can_post)."""
        row = self.store.get_session(token)
        if row is not None:
            return row, True
        session_token = self.store.resolve_share(token)
        if session_token is not None:
            row = self.store.get_session(session_token)
            if row is not None:
                return row, False
        raise NotFoundError(token)

    def _context(self, row) -> ErrorContext:
        return ErrorContext.loads(row["context_json"])

    # -- operations -------------------------------------------------------

    def create_session(
        self,
        ctx: ErrorContext,
        owner_id: str,
        seed_assistant_text: str | None = None,
        seed_guardrail: dict | None = None,
    ) -> dict:
        """Persist a fresh, unvisited session and hand back token + URL.

        A seeded assistant turn carries over an explanation that was already
        generated (and guardrail-filtered) in the terminal, so the dashboard
        conversation continues instead of restarting; the seed replaces the
        usual first-visit generation.
        """
        ctx.validate()
        if not owner_id:
            raise RequestValidationError("owner_id is required")
        token = _new_token()
        now = format_timestamp(self.clock())
        self.store.create_session(token, owner_id, ctx.dumps(), now)
        self._emit("session_created", owner_id, ctx.kind, token)
        if seed_assistant_text:
            guardrail = seed_guardrail or GuardrailOutcome().to_json_dict()
            self.store.append_turn(
                token, 0, "assistant", seed_assistant_text,
                json.dumps(guardrail), "ok", now,
            )
            self._emit("inference", owner_id, ctx.kind, token, is_initial=True)
        return {"token": token, "url": f"{self.base_url}/session/{token}"}

    def check_overuse(self, owner_id: str, now: datetime | None = None) -> OveruseStatus:
        now = now or self.clock()
        since = now - timedelta(minutes=self.overuse_window_min)
        count = self.store.count_sessions_since(owner_id, format_timestamp(since))
        return OveruseStatus(
            warn=count > self.overuse_threshold,
            recent_session_count=count,
            window_minutes=self.overuse_window_min,
        )

    def _generated_text(self, text: str, owner_id: str) -> str:
        if self.check_overuse(owner_id).warn:
            return OVERUSE_REMINDER + "\n\n" + text
        return text

    def visit_session(self, token: str) -> dict:
        """Return the session view; a first visit with a full-access token
        synchronously generates the initial explanation."""
        row, can_post = self._resolve(token)
        if not can_post:
            return self._view(row, can_post=False)

        session_token = row["token"]
        with self._lock_for(session_token):
            row = self.store.get_session(session_token)
            if not row["visited"]:
                self.store.mark_visited(session_token)
                ctx = self._context(row)
                self._emit("session_visited", row["owner_id"], ctx.kind, session_token)
                if not self.store.get_turns(session_token):
                    try:
                        text, outcome = explain.generate_initial(ctx, self.llm)
                    except BackendError:
                        pass  # view carries the explanation-pending marker
                    else:
                        text = self._generated_text(text, row["owner_id"])
                        self.store.append_turn(
                            session_token, 0, "assistant", text,
                            json.dumps(outcome.to_json_dict()), "ok",
                            format_timestamp(self.clock()),
                        )
                        self._emit(
                            "inference", row["owner_id"], ctx.kind, session_token,
                            is_initial=True,
                        )
                row = self.store.get_session(session_token)
            return self._view(row, can_post=True)

    def post_message(self, token: str, user_text: str) -> dict:
        row, can_post = self._resolve(token)
        if not can_post:
            raise ForbiddenError("read-only link cannot post messages")
        if not user_text or not user_text.strip():
            raise RequestValidationError("message text must be non-empty")
        session_token = row["token"]
        with self._lock_for(session_token):
            row = self.store.get_session(session_token)
            if not row["visited"]:
                raise RequestValidationError("session has not been visited yet")
            ctx = self._context(row)
            turns = self.store.get_turns(session_token)
            next_idx = len(turns)
            now = format_timestamp(self.clock())
            self.store.append_turn(session_token, next_idx, "user", user_text, None, "ok", now)

            history = [(t["role"], t["text"]) for t in turns if t["status"] == "ok"]
            try:
                text, outcome = explain.generate_followup(ctx, history, user_text, self.llm)
            except BackendError:
                turn = {
                    "role": "assistant", "text": "", "status": "failed",
                    "created_at": format_timestamp(self.clock()),
                }
                self.store.append_turn(
                    session_token, next_idx + 1, "assistant", "", None, "failed",
                    turn["created_at"],
                )
                return turn
            text = self._generated_text(text, row["owner_id"])
            created = format_timestamp(self.clock())
            self.store.append_turn(
                session_token, next_idx + 1, "assistant", text,
                json.dumps(outcome.to_json_dict()), "ok", created,
            )
            self._emit("inference", row["owner_id"], ctx.kind, session_token, is_initial=False)
            return {"role": "assistant", "text": text, "status": "ok", "created_at": created}

    def retry_last(self, token: str) -> dict:
        """Regenerate after a backend failure: the initial explanation when
        none exists, or the failed assistant reply."""
        row, can_post = self._resolve(token)
        if not can_post:
            raise ForbiddenError("read-only link cannot retry generation")
        session_token = row["token"]
        with self._lock_for(session_token):
            row = self.store.get_session(session_token)
            if not row["visited"]:
                raise RequestValidationError("session has not been visited yet")
            ctx = self._context(row)
            turns = self.store.get_turns(session_token)

            if not turns:
                text, outcome = explain.generate_initial(ctx, self.llm)
                text = self._generated_text(text, row["owner_id"])
                created = format_timestamp(self.clock())
                self.store.append_turn(
                    session_token, 0, "assistant", text,
                    json.dumps(outcome.to_json_dict()), "ok", created,
                )
                self._emit("inference", row["owner_id"], ctx.kind, session_token, is_initial=True)
                return {"role": "assistant", "text": text, "status": "ok", "created_at": created}

            last = turns[-1]
            if last["role"] != "assistant" or last["status"] != "failed":
                raise RequestValidationError("nothing to retry")
            history = [(t["role"], t["text"]) for t in turns[:-2] if t["status"] == "ok"]
            user_text = turns[-2]["text"]
            text, outcome = explain.generate_followup(ctx, history, user_text, self.llm)
            text = self._generated_text(text, row["owner_id"])
            created = format_timestamp(self.clock())
            self.store.replace_turn(
                session_token, last["idx"], text,
                json.dumps(outcome.to_json_dict()), "ok", created,
            )
            self._emit("inference", row["owner_id"], ctx.kind, session_token, is_initial=False)
            return {"role": "assistant", "text": text, "status": "ok", "created_at": created}

    def create_share_link(self, token: str) -> dict:
        row = self.store.get_session(token)
        if row is None:
            if self.store.resolve_share(token):
                raise ForbiddenError("read-only link cannot create share links")
            raise NotFoundError(token)
        share_token = _new_token()
        self.store.add_share(share_token, row["token"], format_timestamp(self.clock()))
        return {"share_token": share_token, "url": f"{self.base_url}/shared/{share_token}"}

    # -- views ------------------------------------------------------------

    def _view(self, row, can_post: bool) -> dict:
        ctx = self._context(row)
        turns = self.store.get_turns(row["token"])
        ok_assistant = [t for t in turns if t["role"] == "assistant" and t["status"] == "ok"]
        pending = bool(row["visited"]) and not ok_assistant
        return {
            "kind": ctx.kind,
            "source_files": [{"path": p, "text": t} for p, t in ctx.source_files],
            "diagnostics": [d.to_json_dict() for d in ctx.diagnostics],
            "runtime_signal": ctx.runtime_signal,
            "stack": [f.to_json_dict() for f in ctx.stack],
            "turns": [
                {
                    "role": t["role"],
                    "text": t["text"],
                    "created_at": t["created_at"],
                    "status": t["status"],
                }
                for t in turns
            ],
            "can_post": can_post,
            "overuse_warning": self.check_overuse(row["owner_id"]).warn if can_post else False,
            "explanation_pending": pending,
        }
