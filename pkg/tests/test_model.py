"""Context schema: round-trips, invariant enforcement, timestamp format."""

from __future__ import annotations

import json
import re
from datetime import timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidekick.model import (
    COMPILE_TIME,
    RUN_TIME,
    ContextValidationError,
    Diagnostic,
    ErrorContext,
    StackFrame,
    VariableBinding,
)

from conftest import make_compile_ctx, make_runtime_ctx

_text = st.text(min_size=0, max_size=40)
_name = st.text(min_size=1, max_size=20)

_bindings = st.builds(VariableBinding, name=_name, type_name=_text, value_repr=_text)
_frames = st.builds(
    StackFrame,
    function_name=_name,
    file=_name,
    line=st.integers(min_value=1, max_value=10_000),
    locals=st.lists(_bindings, max_size=4),
)
_diagnostics = st.builds(
    Diagnostic,
    file=_name,
    line=st.integers(min_value=1, max_value=10_000),
    column=st.integers(min_value=0, max_value=400),
    severity=st.sampled_from(("error", "warning", "note")),
    message=_text,
    raw=_name,
)
_sources = st.lists(st.tuples(_name, _text), min_size=1, max_size=3)
_stamps = st.datetimes(timezones=st.just(timezone.utc))


@st.composite
def contexts(draw) -> ErrorContext:
    kind = draw(st.sampled_from((COMPILE_TIME, RUN_TIME)))
    if kind == COMPILE_TIME:
        stack, signal = [], None
        diags = draw(st.lists(_diagnostics, min_size=1, max_size=4))
    else:
        stack = draw(st.lists(_frames, max_size=4))
        signal = draw(_name)
        diags = draw(st.lists(_diagnostics, max_size=4))
    return ErrorContext(
        kind=kind,
        created_at=draw(_stamps),
        source_files=draw(_sources),
        compiler_invocation=draw(_text),
        diagnostics=diags,
        runtime_signal=signal,
        stack=stack,
        stdin_excerpt=draw(st.none() | _text),
        exit_status=draw(st.integers(min_value=-31, max_value=255)),
    )


@given(contexts())
@settings(max_examples=200)
def test_round_trip(ctx):
    ctx.validate()
    assert ErrorContext.loads(ctx.dumps()) == ctx


def test_cache_schema_keys(compile_ctx):
    data = compile_ctx.to_json_dict()
    assert set(data) == {
        "kind", "created_at", "source_files", "compiler_invocation",
        "diagnostics", "runtime_signal", "stack", "stdin_excerpt", "exit_status",
    }
    assert re.match(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}", data["created_at"])
    assert data["created_at"].endswith("+00:00") or data["created_at"].endswith("Z")
    # round-trips through plain JSON text too
    assert ErrorContext.loads(json.dumps(data)) == compile_ctx


@pytest.mark.parametrize(
    "broken",
    [
        lambda: make_compile_ctx(diagnostics=[]),
        lambda: make_compile_ctx(stack=make_runtime_ctx().stack),
        lambda: make_runtime_ctx(runtime_signal=None),
        lambda: make_compile_ctx(source_files=[]),
        lambda: make_compile_ctx(kind="link_time"),
    ],
)
def test_invariants_rejected(broken):
    with pytest.raises(ContextValidationError):
        broken().validate()


def test_diagnostic_invariants():
    with pytest.raises(ContextValidationError):
        Diagnostic("a.c", 0, 0, "error", "m", "raw").validate()
    with pytest.raises(ContextValidationError):
        Diagnostic("a.c", 1, 0, "fatal", "m", "raw").validate()
    with pytest.raises(ContextValidationError):
        Diagnostic("a.c", 1, 0, "error", "m", "").validate()
    with pytest.raises(ContextValidationError):
        VariableBinding(name="").validate()
    with pytest.raises(ContextValidationError):
        StackFrame(function_name="", file="a.c", line=1).validate()


def test_fingerprint_stable_and_distinct():
    a, b = make_compile_ctx(), make_compile_ctx()
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != make_runtime_ctx().fingerprint()
