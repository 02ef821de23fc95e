"""Wrapper over a standard C compiler that captures failed compiles.

`sidekick-cc` forwards everything to the real compiler (SIDEKICK_REAL_CC,
default `cc`), passes its output through unmodified and mirrors its exit
status. Debug info and sanitizers are added so that later runs of the
produced binary can be captured too. On a failed compile the parsed
diagnostics and the full source are cached for the help commands.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from . import config
from .cache import cache_context
from .diagnostics import parse_compile_diagnostics
from .model import COMPILE_TIME, Diagnostic, ErrorContext, now_utc

C_SOURCE_SUFFIXES = (".c", ".cc", ".cpp", ".cxx", ".C")

HELP_HINT = (
    "sidekick: you can ask for an AI-powered explanation of this error "
    "by running either dcc-help or dcc-sidekick."
)

EXTRA_FLAGS = ["-g", "-fno-omit-frame-pointer"]
SANITIZE_FLAGS = ["-fsanitize=address"]


class SidekickConfigError(Exception):
    """The environment is missing something the wrapper needs (e.g. compiler)."""


@dataclass
class CompileOutcome:
    ok: bool
    exit_status: int
    context: ErrorContext | None = None
    cache_path: Path | None = None
    stdout: str = ""
    stderr: str = ""


def split_compiler_args(argv: list[str]) -> tuple[list[str], list[str]]:
    """Partition a compiler command line into (source_files, flags)."""
    sources = [a for a in argv if not a.startswith("-") and a.endswith(C_SOURCE_SUFFIXES)]
    flags = [a for a in argv if a not in sources]
    return sources, flags


def _read_sources(paths: list[str]) -> list[tuple[str, str]]:
    out = []
    for path in paths:
        out.append((path, Path(path).read_text(errors="replace")))
    return out


def wrap_compile(
    source_files: list[str],
    flags: list[str],
    argv: list[str] | None = None,
    compiler: str | None = None,
    cache: bool = True,
) -> CompileOutcome:
    """Run the real compiler; on failure, cache a compile-time ErrorContext.

    `argv` preserves the caller's original argument order (flag ordering
    matters to linkers); when omitted it is rebuilt as flags + sources.
    """
    compiler = compiler or config.real_compiler()
    if shutil.which(compiler) is None:
        raise SidekickConfigError(f"compiler {compiler!r} not found on PATH")

    # Reading up front both enforces readability and snapshots the source
    # exactly as compiled, before the student edits it again.
    sources = _read_sources(source_files)

    if argv is None:
        argv = list(flags) + list(source_files)
    cmd = [compiler] + list(argv) + EXTRA_FLAGS
    if not any(a.startswith("-fsanitize") for a in argv):
        cmd += SANITIZE_FLAGS

    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode == 0:
        return CompileOutcome(ok=True, exit_status=0, stdout=proc.stdout, stderr=proc.stderr)

    diagnostics = parse_compile_diagnostics(proc.stderr)
    if not diagnostics:
        # Nonzero exit without a parseable file:line diagnostic (often the
        # linker); synthesize one so the context is still explainable.
        first_line = next((ln for ln in proc.stderr.splitlines() if ln.strip()), "compilation failed")
        diagnostics = [
            Diagnostic(
                file=source_files[0] if source_files else "<command line>",
                line=1,
                column=0,
                severity="error",
                message=first_line,
                raw=proc.stderr or first_line,
            )
        ]

    ctx = ErrorContext(
        kind=COMPILE_TIME,
        created_at=now_utc(),
        source_files=sources,
        compiler_invocation=shlex.join(cmd),
        diagnostics=diagnostics,
        exit_status=proc.returncode,
    )
    cache_path = cache_context(ctx) if cache else None
    return CompileOutcome(
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
        print("usage: sidekick-cc <compiler flags and files...>", file=sys.stderr)
        return 2
    sources, flags = split_compiler_args(argv)
    try:
        outcome = wrap_compile(sources, flags, argv=argv)
    except SidekickConfigError as exc:
        print(f"sidekick-cc: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"sidekick-cc: cannot read source: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(outcome.stdout)
    sys.stderr.write(outcome.stderr)
    if not outcome.ok:
        print(HELP_HINT, file=sys.stderr)
    return outcome.exit_status


if __name__ == "__main__":
    sys.exit(main())
