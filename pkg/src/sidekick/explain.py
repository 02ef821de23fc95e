"""Generation pipeline shared by the terminal command and the session service:
prompt assembly, one completion, then the guardrail pass."""

from __future__ import annotations

from .guardrails import GuardrailOutcome, apply_guardrails
from .llm import CompletionRequest, default_model_id
from .model import ErrorContext
from .prompts import build_followup, build_initial


def generate_initial(ctx: ErrorContext, llm) -> tuple[str, GuardrailOutcome]:
    request = CompletionRequest(messages=build_initial(ctx), model_id=default_model_id())
    result = llm.chat(request)
    return apply_guardrails(result.text, llm)


def generate_followup(ctx: ErrorContext, history, user_text: str, llm) -> tuple[str, GuardrailOutcome]:
    request = CompletionRequest(
        messages=build_followup(history, ctx, user_text), model_id=default_model_id()
    )
    result = llm.chat(request)
    return apply_guardrails(result.text, llm)
