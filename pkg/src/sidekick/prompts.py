"""Deterministic prompt assembly from an error context and a conversation.

Identical inputs always produce byte-identical message lists; nothing here
touches the clock, the environment (beyond the prompt-file override), or
any randomness.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .model import COMPILE_TIME, RUN_TIME, ErrorContext

# Trimming and truncation knobs. Budgets are character approximations of
# token limits; counting real tokens per model is out of scope.
HISTORY_CHAR_BUDGET = 24_000
SOURCE_WINDOW_THRESHOLD = 400  # lines
SOURCE_WINDOW_RADIUS = 60  # lines either side of the first error line


@dataclass
class PromptMessage:
    role: str  # system | user | assistant
    content: str

    def validate(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown prompt role {self.role!r}")
        if not self.content:
            raise ValueError("prompt message content must be non-empty")


def _load_prompt_file(name: str) -> str:
    override_dir = os.environ.get("SIDEKICK_PROMPTS_DIR")
    if override_dir:
        return (Path(override_dir) / name).read_text()
    return resources.files("sidekick").joinpath("prompts").joinpath(name).read_text()


def load_system_prompt() -> str:
    return _load_prompt_file("system.txt")


def load_rewrite_prompt() -> str:
    return _load_prompt_file("rewrite.txt")


def _first_error_line(ctx: ErrorContext, path: str) -> int | None:
    for diag in ctx.diagnostics:
        if diag.file == path or os.path.basename(diag.file) == os.path.basename(path):
            return diag.line
    for frame in ctx.stack:
        if frame.file == path or os.path.basename(frame.file) == os.path.basename(path):
            return frame.line
    return None


def _numbered_source(ctx: ErrorContext, path: str, text: str) -> str:
    lines = text.splitlines()
    start, end = 1, len(lines)
    prefix_marker = suffix_marker = None
    if len(lines) > SOURCE_WINDOW_THRESHOLD:
        anchor = _first_error_line(ctx, path) or 1
        start = max(1, anchor - SOURCE_WINDOW_RADIUS)
        end = min(len(lines), anchor + SOURCE_WINDOW_RADIUS)
        if start > 1:
            prefix_marker = f"... (lines 1-{start - 1} omitted) ..."
        if end < len(lines):
            suffix_marker = f"... (lines {end + 1}-{len(lines)} omitted) ..."
    out = []
    if prefix_marker:
        out.append(prefix_marker)
    for i in range(start, end + 1):
        out.append(f"{i:4d} | {lines[i - 1]}")
    if suffix_marker:
        out.append(suffix_marker)
    return "\n".join(out)


def _error_text(ctx: ErrorContext) -> str:
    parts = []
    if ctx.kind == RUN_TIME and ctx.runtime_signal:
        parts.append(f"The program was terminated by: {ctx.runtime_signal}")
    for diag in ctx.diagnostics:
        parts.append(diag.raw)
        # raw normally embeds the message; when it does not (synthesized
        # diagnostics), keep the message visible too
        if diag.message and diag.message not in diag.raw:
            parts.append(f"({diag.severity}: {diag.message})")
    return "\n".join(parts)


def _initial_user_message(ctx: ErrorContext) -> str:
    if ctx.kind == COMPILE_TIME:
        header = "A student's C program failed to compile."
    else:
        header = "A student's C program crashed while running."
    sections = [header]

    error_text = _error_text(ctx)
    if error_text:
        sections.append("=== ERROR OUTPUT ===\n" + error_text)

    for path, text in ctx.source_files:
        sections.append(f"=== SOURCE: {path} ===\n" + _numbered_source(ctx, path, text))

    if ctx.kind == RUN_TIME and ctx.stack:
        stack_lines = [f"{f.function_name} at {f.file}:{f.line}" for f in ctx.stack]
        sections.append("=== STACK (innermost call first) ===\n" + "\n".join(stack_lines))

        locals_blocks = []
        for frame in ctx.stack:
            if not frame.locals:
                continue
            bindings = "\n".join(f"  {b.name} = {b.value_repr}" for b in frame.locals)
            locals_blocks.append(f"{frame.function_name} ({frame.file}:{frame.line}):\n{bindings}")
        if locals_blocks:
            sections.append("=== LOCALS ===\n" + "\n".join(locals_blocks))

    if ctx.stdin_excerpt:
        sections.append("=== STDIN GIVEN TO THE PROGRAM ===\n" + ctx.stdin_excerpt)

    return "\n\n".join(sections)


def build_initial(ctx: ErrorContext) -> list[PromptMessage]:
    """Messages for the automatic first explanation of a fresh error."""
    ctx.validate()
    return [
        PromptMessage(role="system", content=load_system_prompt()),
        PromptMessage(role="user", content=_initial_user_message(ctx)),
    ]


def build_followup(
    history,
    ctx: ErrorContext,
    user_text: str,
    char_budget: int = HISTORY_CHAR_BUDGET,
) -> list[PromptMessage]:
    """Messages for a follow-up turn: system + error context + history + question.

    `history` is the conversation so far as (role, text) pairs, oldest
    first, starting with the assistant's initial explanation. When the
    total size exceeds the character budget the oldest history pairs are
    dropped; the system message, the context message and the new question
    are never dropped.
    """
    if not user_text.strip():
        raise ValueError("follow-up text must be non-empty")
    base = build_initial(ctx)
    history_msgs = [PromptMessage(role=role, content=text) for role, text in history if text]
    tail = PromptMessage(role="user", content=user_text)

    def total(msgs):
        return sum(len(m.content) for m in msgs)

    while history_msgs and total(base + history_msgs + [tail]) > char_budget:
        del history_msgs[: min(2, len(history_msgs))]

    return base + history_msgs + [tail]
