"""Shared fixtures: contexts, mock backends, an in-process service and a
live HTTP server. Everything runs offline; the only external binaries the
capture tests touch are the local C compiler and gdb."""

from __future__ import annotations

import shutil
import threading
import time
from datetime import timezone, datetime
from pathlib import Path

import pytest

from sidekick.llm import MockBackend
from sidekick.model import (
    COMPILE_TIME,
    RUN_TIME,
    Diagnostic,
    ErrorContext,
    StackFrame,
    VariableBinding,
)
from sidekick.service.core import SessionService
from sidekick.service.store import Store

FIXTURES = Path(__file__).parent / "fixtures"

HAVE_CC = shutil.which("cc") is not None
HAVE_GDB = shutil.which("gdb") is not None

needs_cc = pytest.mark.skipif(not HAVE_CC, reason="no C compiler on PATH")
needs_gdb = pytest.mark.skipif(
    not (HAVE_CC and HAVE_GDB), reason="needs both cc and gdb on PATH"
)


@pytest.fixture(autouse=True)
def sidekick_env(tmp_path, monkeypatch):
    """Point every cache/log path at a fresh temp dir, never the real home."""
    monkeypatch.setenv("SIDEKICK_CACHE_DIR", str(tmp_path / "sidekick-cache"))
    monkeypatch.setenv("SIDEKICK_EVENT_LOG", str(tmp_path / "events.ndjson"))
    monkeypatch.setenv("SIDEKICK_STAFF_FILE", str(tmp_path / "staff_ids.txt"))
    monkeypatch.delenv("SIDEKICK_MOCK_SCRIPT", raising=False)
    monkeypatch.setenv("SIDEKICK_LLM_BACKEND", "mock")
    return tmp_path


def make_compile_ctx(**overrides) -> ErrorContext:
    defaults = dict(
        kind=COMPILE_TIME,
        created_at=datetime(2025, 6, 2, 3, 4, 5, tzinfo=timezone.utc),
        source_files=[("prog.c", "int main(void) {\n    int x = 3\n    return x;\n}\n")],
        compiler_invocation="cc -o prog prog.c",
        diagnostics=[
            Diagnostic(
                file="prog.c",
                line=3,
                column=5,
                severity="error",
                message="expected ';' before 'return'",
                raw="prog.c:3:5: error: expected ';' before 'return'",
            )
        ],
        exit_status=1,
    )
    defaults.update(overrides)
    return ErrorContext(**defaults)


def make_runtime_ctx(**overrides) -> ErrorContext:
    defaults = dict(
        kind=RUN_TIME,
        created_at=datetime(2025, 6, 2, 3, 4, 5, tzinfo=timezone.utc),
        source_files=[("crash.c", "int main(void) { return *(int *)0; }\n")],
        compiler_invocation="./crash",
        diagnostics=[
            Diagnostic(
                file="crash.c",
                line=1,
                column=0,
                severity="error",
                message="SEGV on null address",
                raw="==1==ERROR: AddressSanitizer: SEGV on unknown address 0x0\nSUMMARY: SEGV",
            )
        ],
        runtime_signal="SEGV",
        stack=[
            StackFrame(
                function_name="main",
                file="crash.c",
                line=1,
                locals=[VariableBinding(name="p", type_name="int *", value_repr="0x0")],
            )
        ],
        exit_status=1,
    )
    defaults.update(overrides)
    return ErrorContext(**defaults)


@pytest.fixture
def compile_ctx() -> ErrorContext:
    return make_compile_ctx()


@pytest.fixture
def runtime_ctx() -> ErrorContext:
    return make_runtime_ctx()


def make_service(tmp_path, backend=None, **kwargs) -> SessionService:
    backend = backend or MockBackend(default="Check your loop bound carefully.")
    defaults = dict(base_url="http://testserver", events=None)
    defaults.update(kwargs)
    return SessionService(Store(tmp_path / "sessions.db"), backend, **defaults)


@pytest.fixture
def service(tmp_path):
    return make_service(tmp_path)


class LiveServer:
    """A real uvicorn server in a thread, backed by a scriptable mock."""

    def __init__(self, base_url: str, service: SessionService, backend: MockBackend):
        self.base_url = base_url
        self.service = service
        self.backend = backend


@pytest.fixture
def live_server(tmp_path):
    import uvicorn

    from sidekick.service.http import create_app

    backend = MockBackend(responder=lambda req: "Walk through the failing line step by step.")
    service = make_service(tmp_path, backend=backend)
    app = create_app(service)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("live server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    base_url = f"http://127.0.0.1:{port}"
    service.base_url = base_url
    yield LiveServer(base_url, service, backend)
    server.should_exit = True
    thread.join(timeout=5)
