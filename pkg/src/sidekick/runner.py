"""Run a sanitizer-instrumented executable and capture crash context.

A failing run is detected from the exit status (killed by signal) or from a
sanitizer report on stderr. The crash-point stack with local variable
values is then harvested by re-running the program under gdb in batch mode
with the same stdin; frames from the runtime support code are filtered out
so only the student's own calls remain, innermost first. Locals capture is
best effort: frames whose variables cannot be read simply carry an empty
list.
"""

from __future__ import annotations

import json
import os
import re
import shlex
import signal as signal_mod
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .cache import cache_context
from .compiler import HELP_HINT, SidekickConfigError
from .model import RUN_TIME, Diagnostic, ErrorContext, StackFrame, VariableBinding, now_utc

STDIN_EXCERPT_CHARS = 1024
RUN_TIMEOUT_S = 30

_ASAN_ERROR_RE = re.compile(r"ERROR: AddressSanitizer:?\s+([A-Za-z0-9_-]+)")
_ASAN_SUMMARY_RE = re.compile(r"^SUMMARY: .*$", re.MULTILINE)
_UBSAN_RE = re.compile(r"runtime error: (.+)$", re.MULTILINE)

_HARVEST_MARKER = "SIDEKICK_FRAMES_JSON:"


@dataclass
class RunOutcome:
    ok: bool
    exit_status: int
    context: ErrorContext | None = None
    cache_path: Path | None = None
    stdout: str = ""
    stderr: str = ""


@dataclass
class _Harvested:
    frames: list[dict] = field(default_factory=list)


def _sanitizer_env(abort_on_error: bool = False) -> dict:
    env = dict(os.environ)
    asan = ["detect_leaks=0", "color=never"]
    ubsan = ["halt_on_error=1", "print_stacktrace=1"]
    if abort_on_error:
        asan.append("abort_on_error=1")
        ubsan.append("abort_on_error=1")
    env["ASAN_OPTIONS"] = ":".join(asan)
    env["UBSAN_OPTIONS"] = ":".join(ubsan)
    return env


def detect_failure(returncode: int, stderr: str) -> str | None:
    """Name the runtime error, or None for a normal termination.

    A plain nonzero exit (a program returning 1 from main) is normal; only
    signals and sanitizer-detected errors count as run-time errors.
    """
    match = _ASAN_ERROR_RE.search(stderr)
    if match:
        return match.group(1)
    match = _UBSAN_RE.search(stderr)
    if match and returncode != 0:
        return f"runtime error: {match.group(1)}"
    if returncode < 0:
        try:
            return signal_mod.Signals(-returncode).name
        except ValueError:
            return f"signal {-returncode}"
    return None


def _gdb_harvest(
    executable: Path,
    args: list[str],
    stdin_text: str | None,
    cwd: Path,
    timeout: float,
) -> list[dict]:
    gdb = os.environ.get("SIDEKICK_GDB", "gdb")
    if not gdb:  # setting SIDEKICK_GDB="" disables the locals harvest
        return []
    run_cmd = "run"
    if args:
        run_cmd += " " + " ".join(shlex.quote(a) for a in args)
    stdin_file = None
    try:
        if stdin_text is not None:
            fd, stdin_file = tempfile.mkstemp(prefix="sidekick-stdin-")
            with os.fdopen(fd, "w") as handle:
                handle.write(stdin_text)
            run_cmd += f" < {shlex.quote(stdin_file)}"
        harvest_path = resources.files("sidekick").joinpath("_gdb_harvest.py")
        with resources.as_file(harvest_path) as script:
            proc = subprocess.run(
                [
                    gdb,
                    "-batch",
                    "-nx",
                    "-ex", "set confirm off",
                    "-ex", "set pagination off",
                    "-ex", run_cmd,
                    "-ex", f"source {script}",
                    str(executable),
                ],
                capture_output=True,
                text=True,
                cwd=cwd,
                env=_sanitizer_env(abort_on_error=True),
                stdin=subprocess.DEVNULL,
                timeout=timeout,
            )
    except (FileNotFoundError, subprocess.TimeoutExpired):
        return []
    finally:
        if stdin_file and os.path.exists(stdin_file):
            os.unlink(stdin_file)
    for line in proc.stdout.splitlines():
        if line.startswith(_HARVEST_MARKER):
            try:
                return json.loads(line[len(_HARVEST_MARKER):])
            except json.JSONDecodeError:
                return []
    return []


def _is_user_file(name: str | None, cwd: Path, allowed: set[Path] | None) -> Path | None:
    """Resolve a debug-info filename to the student's source file, if it is one."""
    if not name:
        return None
    path = Path(name)
    candidate = path if path.is_absolute() else cwd / path
    try:
        resolved = candidate.resolve()
    except OSError:
        return None
    if allowed is not None:
        return resolved if resolved in allowed else None
    if not resolved.is_file():
        return None
    if str(resolved).startswith(("/usr/", "/lib/", "/opt/")):
        return None
    return resolved


def _student_frames(
    harvested: list[dict], cwd: Path, allowed: set[Path] | None
) -> tuple[list[StackFrame], list[Path]]:
    frames: list[StackFrame] = []
    files: list[Path] = []
    for entry in harvested:
        resolved = _is_user_file(entry.get("file"), cwd, allowed)
        if resolved is None or not entry.get("function") or entry.get("line", 0) < 1:
            continue
        bindings = [
            VariableBinding(
                name=b["name"], type_name=b.get("type", ""), value_repr=b.get("value", "")
            )
            for b in entry.get("locals", [])
            if b.get("name")
        ]
        frames.append(
            StackFrame(
                function_name=entry["function"],
                file=entry["file"],
                line=entry["line"],
                locals=bindings,
            )
        )
        if resolved not in files:
            files.append(resolved)
        if entry["function"] == "main":
            break
    return frames, files


def _error_summary(stderr: str, runtime_signal: str) -> str:
    match = _ASAN_SUMMARY_RE.search(stderr)
    if match:
        return match.group(0)
    for line in stderr.splitlines():
        if "ERROR:" in line or "runtime error:" in line:
            return line.strip()
    return f"program terminated by {runtime_signal}"


def run_with_capture(
    executable: str | Path,
    args: list[str] | None = None,
    stdin: str | None = None,
    source_files: list[str] | None = None,
    cwd: str | Path | None = None,
    timeout: float = RUN_TIMEOUT_S,
    cache: bool = True,
) -> RunOutcome:
    """Execute the program; on a crash, cache a run-time ErrorContext.

    When `source_files` is omitted the student's files are inferred from
    the stack: frames whose file exists under the working directory (and
    is not a system path) are kept.
    """
    executable = Path(executable)
    args = list(args or [])
    cwd = Path(cwd) if cwd else Path.cwd()
    if not executable.exists():
        raise SidekickConfigError(f"executable {executable} not found")

    exe_arg = str(executable)
    if not os.path.isabs(exe_arg) and "/" not in exe_arg:
        exe_arg = "./" + exe_arg
    proc = subprocess.run(
        [exe_arg, *args],
        input=stdin,
        capture_output=True,
        text=True,
        cwd=cwd,
        env=_sanitizer_env(),
        timeout=timeout,
    )

    runtime_signal = detect_failure(proc.returncode, proc.stderr)
    if runtime_signal is None:
        return RunOutcome(
            ok=True, exit_status=proc.returncode, stdout=proc.stdout, stderr=proc.stderr
        )

    allowed = None
    if source_files:
        allowed = set()
        for name in source_files:
            path = Path(name)
            allowed.add((path if path.is_absolute() else cwd / path).resolve())

    harvested = _gdb_harvest(executable.resolve(), args, stdin, cwd, timeout)
    frames, frame_files = _student_frames(harvested, cwd, allowed)

    if source_files:
        sources = [(name, (cwd / name).resolve().read_text(errors="replace")) for name in source_files]
    elif frame_files:
        sources = [(str(p), p.read_text(errors="replace")) for p in frame_files]
    else:
        sources = [(str(executable), "")]

    if frames:
        diag_file, diag_line = frames[0].file, frames[0].line
    else:
        diag_file, diag_line = sources[0][0], 1
    summary = _error_summary(proc.stderr, runtime_signal)
    diagnostics = [
        Diagnostic(
            file=diag_file,
            line=diag_line,
            column=0,
            severity="error",
            message=summary,
            raw=proc.stderr.strip() or summary,
        )
    ]

    ctx = ErrorContext(
        kind=RUN_TIME,
        created_at=now_utc(),
        source_files=sources,
        compiler_invocation=shlex.join([str(executable), *args]),
        diagnostics=diagnostics,
        runtime_signal=runtime_signal,
        stack=frames,
        stdin_excerpt=stdin[:STDIN_EXCERPT_CHARS] if stdin else None,
        exit_status=proc.returncode,
    )
    cache_path = cache_context(ctx) if cache else None
    return RunOutcome(
        ok=False,
        exit_status=proc.returncode,
        context=ctx,
        cache_path=cache_path,
        stdout=proc.stdout,
        stderr=proc.stderr,
    )


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        print("usage: sidekick-run <executable> [args...]", file=sys.stderr)
        return 2
    stdin_text = None
    if not sys.stdin.isatty():
        stdin_text = sys.stdin.read(1 << 20) or None
    try:
        outcome = run_with_capture(argv[0], argv[1:], stdin=stdin_text)
    except SidekickConfigError as exc:
        print(f"sidekick-run: {exc}", file=sys.stderr)
        return 2
    except subprocess.TimeoutExpired:
        print("sidekick-run: program timed out, no error captured", file=sys.stderr)
        return 2
    sys.stdout.write(outcome.stdout)
    sys.stderr.write(outcome.stderr)
    if not outcome.ok:
        print(HELP_HINT, file=sys.stderr)
        return 128 + (-outcome.exit_status) if outcome.exit_status < 0 else outcome.exit_status
    return outcome.exit_status


if __name__ == "__main__":
    sys.exit(main())
