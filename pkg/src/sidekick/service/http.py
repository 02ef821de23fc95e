"""HTTP/JSON surface of the session service, plus dashboard page routes."""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse

from .. import config
from ..llm import backend_from_env
from ..model import ContextValidationError, ErrorContext
from ..telemetry.events import EventLog, load_staff_ids
from .core import (
    ForbiddenError,
    NotFoundError,
    RequestValidationError,
    SessionService,
)
from .store import Store

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>Sidekick</title></head>
<body><p>The dashboard frontend is not installed on this server.
Set SIDEKICK_FRONTEND_DIST to a built frontend to serve it here; the JSON
API under /api is fully available.</p></body></html>"""


def create_app(service: SessionService, frontend_dist: str | None = None) -> FastAPI:
    app = FastAPI(title="sidekick session service")
    app.state.service = service
    dist = Path(frontend_dist) if frontend_dist else None

    @app.exception_handler(NotFoundError)
    async def _not_found(_req, _exc):
        return JSONResponse({"error": "not found"}, status_code=404)

    @app.exception_handler(ForbiddenError)
    async def _forbidden(_req, exc):
        return JSONResponse({"error": str(exc)}, status_code=403)

    @app.exception_handler(RequestValidationError)
    async def _invalid(_req, exc):
        return JSONResponse({"error": str(exc)}, status_code=422)

    @app.exception_handler(ContextValidationError)
    async def _bad_context(_req, exc):
        return JSONResponse({"error": f"invalid error context: {exc}"}, status_code=422)

    @app.post("/api/sessions")
    async def create_session(request: Request):
        body = await request.json()
        owner_id = body.pop("owner_id", None)
        if not owner_id:
            raise RequestValidationError("owner_id is required")
        seed_text = body.pop("seed_assistant_text", None)
        seed_guardrail = body.pop("seed_guardrail", None)
        ctx = ErrorContext.from_json_dict(body)
        return service.create_session(
            ctx, owner_id, seed_assistant_text=seed_text, seed_guardrail=seed_guardrail
        )

    @app.get("/api/sessions/{token}")
    def get_session(token: str):
        return service.visit_session(token)

    @app.post("/api/sessions/{token}/messages")
    async def post_message(token: str, request: Request):
        body = await request.json()
        return service.post_message(token, body.get("text", ""))

    @app.post("/api/sessions/{token}/share")
    def share(token: str):
        return service.create_share_link(token)

    @app.post("/api/sessions/{token}/retry")
    def retry(token: str):
        return service.retry_last(token)

    def _page() -> HTMLResponse | FileResponse:
        if dist is not None:
            index = dist / "index.html"
            if index.is_file():
                return FileResponse(index)
        return HTMLResponse(_FALLBACK_PAGE)

    @app.get("/session/{token}")
    def session_page(token: str):
        return _page()

    @app.get("/shared/{share_token}")
    def shared_page(share_token: str):
        return _page()

    @app.get("/static/{name:path}")
    def static_asset(name: str):
        if dist is not None:
            target = (dist / name).resolve()
            if target.is_file() and str(target).startswith(str(dist.resolve())):
                return FileResponse(target)
        return JSONResponse({"error": "not found"}, status_code=404)

    return app


def app_from_env() -> FastAPI:
    db_path = os.environ.get("SIDEKICK_DB_PATH", str(config.cache_dir() / "sessions.db"))
    events = EventLog(config.event_log_path(), load_staff_ids(config.staff_file()))
    service = SessionService(
        store=Store(db_path),
        llm=backend_from_env(),
        base_url=config.server_url(),
        events=events,
        overuse_threshold=config.overuse_threshold(),
        overuse_window_min=config.overuse_window_min(),
    )
    return create_app(service, frontend_dist=os.environ.get("SIDEKICK_FRONTEND_DIST"))


def main() -> int:
    import uvicorn

    host = os.environ.get("SIDEKICK_HOST", "127.0.0.1")
    port = int(os.environ.get("SIDEKICK_PORT", "8000"))
    uvicorn.run(app_from_env(), host=host, port=port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
