"""Executed inside gdb (via `source`) after the inferior stopped on a crash.

Walks the stack innermost-first and prints one machine-readable JSON line
with function, file, line and the visible variable bindings of each frame.
Runs under gdb's embedded Python, so only stdlib plus the gdb module here.
"""

import json

import gdb  # noqa: F401  (only importable inside gdb)

MARKER = "SIDEKICK_FRAMES_JSON:"
MAX_FRAMES = 64
MAX_VALUE_CHARS = 200


def _bindings(frame):
    out = []
    try:
        block = frame.block()
    except RuntimeError:
        return out
    seen = set()
    while block is not None and not block.is_global and not block.is_static:
        for symbol in block:
            if not (symbol.is_variable or symbol.is_argument):
                continue
            if symbol.name in seen:
                continue
            seen.add(symbol.name)
            try:
                value = str(frame.read_var(symbol, block))[:MAX_VALUE_CHARS]
            except Exception:
                continue
            out.append({"name": symbol.name, "type": str(symbol.type), "value": value})
        block = block.superblock
    return out


def harvest():
    frames = []
    try:
        frame = gdb.newest_frame()
    except gdb.error:
        frame = None
    while frame is not None and len(frames) < MAX_FRAMES:
        try:
            sal = frame.find_sal()
            frames.append(
                {
                    "function": frame.name(),
                    "file": sal.symtab.filename if sal.symtab else None,
                    "line": sal.line,
                    "locals": _bindings(frame),
                }
            )
        except Exception:
            frames.append({"function": None, "file": None, "line": 0, "locals": []})
        try:
            frame = frame.older()
        except gdb.error:
            break
    print(MARKER + json.dumps(frames))


harvest()
