"""Parse gcc/clang stderr into structured diagnostics.

Total by construction: any input yields a (possibly empty) list, and lines
that do not introduce a new diagnostic (source excerpts, caret lines,
"In function ..." headers, linker chatter) are folded into the raw text of
the diagnostic they follow.
"""

from __future__ import annotations

import re

from .model import Diagnostic

# <file>:<line>[:<col>]: <severity>: <message> where severity may be a
# phrase like "fatal error". File paths with whitespace are not matched;
# requiring this keeps prose lines ("In file included from x.h:3:") out.
_DIAG_RE = re.compile(
    r"^(?P<file>[^:\s]+):(?P<line>\d+)(?::(?P<column>\d+))?:\s*"
    r"(?P<severity>[A-Za-z][A-Za-z ]*?):\s?(?P<message>.*)$"
)

_ANSI_RE = re.compile(r"\x1b\[[0-9;]*m")


def _map_severity(word: str) -> str:
    word = word.lower()
    if "error" in word:
        return "error"
    if "warning" in word:
        return "warning"
    return "note"


def parse_compile_diagnostics(raw_stderr: str) -> list[Diagnostic]:
    """Extract one Diagnostic per `file:line[:col]: severity: message` line.

    Continuation lines attach to the preceding diagnostic's raw text and
    are dropped when no diagnostic has been seen yet. Order is preserved.
    """
    diagnostics: list[Diagnostic] = []
    for line in _ANSI_RE.sub("", raw_stderr).splitlines():
        match = _DIAG_RE.match(line)
        if match:
            diagnostics.append(
                Diagnostic(
                    file=match.group("file"),
                    line=int(match.group("line")),
                    column=int(match.group("column") or 0),
                    severity=_map_severity(match.group("severity")),
                    message=match.group("message"),
                    raw=line,
                )
            )
        elif diagnostics:
            diagnostics[-1].raw += "\n" + line
    return [d for d in diagnostics if d.line >= 1]
