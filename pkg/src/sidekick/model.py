"""Structured snapshot of one compile- or run-time error.

The ErrorContext here is the single exchange format between the compiler
wrapper, the local cache, the help commands and the session service, so its
JSON form is pinned: top-level keys are exactly `kind`, `created_at`,
`source_files`, `compiler_invocation`, `diagnostics`, `runtime_signal`,
`stack`, `stdin_excerpt`, `exit_status`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

COMPILE_TIME = "compile_time"
RUN_TIME = "run_time"
KINDS = (COMPILE_TIME, RUN_TIME)
SEVERITIES = ("error", "warning", "note")


class ContextValidationError(ValueError):
    """An ErrorContext (or one of its parts) violates its invariants."""


def now_utc() -> datetime:
    return datetime.now(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    """RFC 3339 UTC text for a timezone-aware datetime."""
    if ts.tzinfo is None:
        raise ContextValidationError("timestamp must be timezone-aware")
    return ts.astimezone(timezone.utc).isoformat()


def parse_timestamp(text: str) -> datetime:
    # datetime.fromisoformat() in 3.10 rejects a trailing 'Z'
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass
class Diagnostic:
    """One compiler (or synthesized run-time) diagnostic."""

    file: str
    line: int
    column: int
    severity: str
    message: str
    raw: str

    def validate(self) -> None:
        if self.line < 1:
            raise ContextValidationError(f"diagnostic line must be >= 1, got {self.line}")
        if self.severity not in SEVERITIES:
            raise ContextValidationError(f"unknown severity {self.severity!r}")
        if not self.raw:
            raise ContextValidationError("diagnostic raw text must be non-empty")

    def to_json_dict(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "column": self.column,
            "severity": self.severity,
            "message": self.message,
            "raw": self.raw,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Diagnostic":
        return cls(
            file=data["file"],
            line=data["line"],
            column=data["column"],
            severity=data["severity"],
            message=data["message"],
            raw=data["raw"],
        )


@dataclass
class VariableBinding:
    """A named value captured from a stack frame."""

    name: str
    type_name: str = ""
    value_repr: str = ""

    def validate(self) -> None:
        if not self.name:
            raise ContextValidationError("variable binding needs a name")

    def to_json_dict(self) -> dict:
        return {"name": self.name, "type_name": self.type_name, "value_repr": self.value_repr}

    @classmethod
    def from_json_dict(cls, data: dict) -> "VariableBinding":
        return cls(
            name=data["name"],
            type_name=data.get("type_name", ""),
            value_repr=data.get("value_repr", ""),
        )


@dataclass
class StackFrame:
    """One frame of the crash-point call stack, innermost first."""

    function_name: str
    file: str
    line: int
    locals: list[VariableBinding] = field(default_factory=list)

    def validate(self) -> None:
        if not self.function_name:
            raise ContextValidationError("stack frame needs a function name")
        if self.line < 1:
            raise ContextValidationError(f"stack frame line must be >= 1, got {self.line}")
        for binding in self.locals:
            binding.validate()

    def to_json_dict(self) -> dict:
        return {
            "function_name": self.function_name,
            "file": self.file,
            "line": self.line,
            "locals": [b.to_json_dict() for b in self.locals],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StackFrame":
        return cls(
            function_name=data["function_name"],
            file=data["file"],
            line=data["line"],
            locals=[VariableBinding.from_json_dict(b) for b in data.get("locals", [])],
        )


@dataclass
class ErrorContext:
    """Everything captured about one failed compile or crashed run."""

    kind: str
    created_at: datetime
    source_files: list[tuple[str, str]]
    compiler_invocation: str
    diagnostics: list[Diagnostic]
    exit_status: int
    runtime_signal: str | None = None
    stack: list[StackFrame] = field(default_factory=list)
    stdin_excerpt: str | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ContextValidationError(f"unknown context kind {self.kind!r}")
        if not self.source_files:
            raise ContextValidationError("context needs at least one source file")
        if self.created_at.tzinfo is None:
            raise ContextValidationError("created_at must be timezone-aware")
        for diag in self.diagnostics:
            diag.validate()
        for frame in self.stack:
            frame.validate()
        if self.kind == COMPILE_TIME:
            if self.stack:
                raise ContextValidationError("compile-time context cannot carry a stack")
            if not self.diagnostics:
                raise ContextValidationError("compile-time context needs diagnostics")
        if self.kind == RUN_TIME and not self.runtime_signal:
            raise ContextValidationError("run-time context needs a runtime_signal")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "created_at": format_timestamp(self.created_at),
            "source_files": [{"path": p, "text": t} for p, t in self.source_files],
            "compiler_invocation": self.compiler_invocation,
            "diagnostics": [d.to_json_dict() for d in self.diagnostics],
            "runtime_signal": self.runtime_signal,
            "stack": [f.to_json_dict() for f in self.stack],
            "stdin_excerpt": self.stdin_excerpt,
            "exit_status": self.exit_status,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ErrorContext":
        return cls(
            kind=data["kind"],
            created_at=parse_timestamp(data["created_at"]),
            source_files=[(f["path"], f["text"]) for f in data["source_files"]],
            compiler_invocation=data["compiler_invocation"],
            diagnostics=[Diagnostic.from_json_dict(d) for d in data["diagnostics"]],
            runtime_signal=data.get("runtime_signal"),
            stack=[StackFrame.from_json_dict(f) for f in data.get("stack", [])],
            stdin_excerpt=data.get("stdin_excerpt"),
            exit_status=data["exit_status"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "ErrorContext":
        return cls.from_json_dict(json.loads(text))

    def fingerprint(self) -> str:
        """Stable identifier for "the same cached error" across commands."""
        canonical = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
