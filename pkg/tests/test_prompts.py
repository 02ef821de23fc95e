"""Prompt assembly: section layout, omission rules, determinism, trimming."""

from __future__ import annotations

from hypothesis import given, settings

from sidekick.model import StackFrame, VariableBinding
from sidekick.prompts import build_followup, build_initial, load_system_prompt

from conftest import make_compile_ctx, make_runtime_ctx
from test_model import contexts


def test_compile_prompt_has_diagnostics_but_no_stack():
    msgs = build_initial(make_compile_ctx())
    assert [m.role for m in msgs] == ["system", "user"]
    user = msgs[1].content
    assert "expected ';' before 'return'" in user
    assert "STACK" not in user
    assert "LOCALS" not in user
    assert "int x = 3" in user  # source included


def test_runtime_prompt_lists_frames_innermost_first():
    ctx = make_runtime_ctx(
        stack=[
            StackFrame("read_first", "crash.c", 5, [VariableBinding("fallback", "int", "7")]),
            StackFrame("main", "crash.c", 10, []),
        ]
    )
    user = build_initial(ctx)[1].content
    assert "STACK" in user
    assert user.index("read_first at crash.c:5") < user.index("main at crash.c:10")
    assert "LOCALS" in user
    assert "fallback = 7" in user
    assert "SEGV" in user


def test_locals_section_omitted_when_all_frames_empty():
    ctx = make_runtime_ctx(
        stack=[StackFrame("f", "a.c", 1, []), StackFrame("main", "a.c", 9, [])]
    )
    user = build_initial(ctx)[1].content
    assert "STACK" in user
    assert "LOCALS" not in user


def test_source_lines_are_numbered():
    user = build_initial(make_compile_ctx())[1].content
    assert "   2 |     int x = 3" in user


def test_determinism_byte_identical():
    ctx = make_runtime_ctx()
    first = build_initial(ctx)
    second = build_initial(ctx)
    assert [(m.role, m.content) for m in first] == [(m.role, m.content) for m in second]


def test_system_prompt_contains_no_solution_and_off_topic_provisions():
    text = load_system_prompt().lower()
    assert "solution" in text
    assert "code block" in text
    assert "off topic" in text or "off-topic" in text


def test_long_source_windowed_around_error_line():
    lines = [f"int filler_{i};" for i in range(1, 1001)]
    lines[499] = "int broken = 3"  # line 500
    ctx = make_compile_ctx(source_files=[("big.c", "\n".join(lines))])
    ctx.diagnostics[0].file = "big.c"
    ctx.diagnostics[0].line = 500
    user = build_initial(ctx)[1].content
    assert "int broken = 3" in user
    assert "int filler_1;" not in user
    assert "omitted" in user


@given(contexts())
@settings(max_examples=150)
def test_completeness_over_generated_contexts(ctx):
    user = build_initial(ctx)[1].content
    for diag in ctx.diagnostics:
        assert diag.message in user
    for frame in ctx.stack:
        assert frame.function_name in user


def test_followup_message_shape():
    ctx = make_compile_ctx()
    history = [("assistant", "It means a semicolon is missing somewhere.")]
    msgs = build_followup(history, ctx, "which line exactly?")
    assert [m.role for m in msgs] == ["system", "user", "assistant", "user"]
    assert msgs[-1].content == "which line exactly?"
    assert msgs[1].content == build_initial(ctx)[1].content


def test_followup_trims_oldest_pairs_first():
    ctx = make_compile_ctx()
    history = []
    for i in range(15):
        history.append(("assistant", f"answer {i:02d} " + "x" * 1200))
        history.append(("user", f"question {i:02d} " + "y" * 1200))
    msgs = build_followup(history, ctx, "final question", char_budget=9000)
    contents = "\n".join(m.content for m in msgs)
    assert msgs[0].role == "system"
    assert msgs[1].content == build_initial(ctx)[1].content  # context kept
    assert "answer 00" not in contents  # oldest dropped
    assert "question 14" in contents  # newest kept
    assert msgs[-1].content == "final question"
    assert sum(len(m.content) for m in msgs) <= 9000
