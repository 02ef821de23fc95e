"""Post-process candidate responses so students get guidance, not solutions.

Every assistant response passes through here. Responses containing fenced
code blocks are rewritten once by a second model pass; if the rewrite still
contains a fence (or the backend fails), the fenced regions are deleted
mechanically. Whatever the backend does, the final text never contains a
fenced code block.
"""

from __future__ import annotations

from dataclasses import dataclass

from .llm import BackendError, CompletionRequest, CompletionResult, default_model_id
from .prompts import PromptMessage, load_rewrite_prompt

FENCE = "```"
STRIP_MARKER = "[code omitted — explained above]"


@dataclass
class GuardrailOutcome:
    code_block_detected: bool = False
    rewritten: bool = False
    fallback_stripped: bool = False
    # retained for logging and efficacy research, never shown to the student
    original_text: str = ""

    def to_json_dict(self) -> dict:
        return {
            "code_block_detected": self.code_block_detected,
            "rewritten": self.rewritten,
            "fallback_stripped": self.fallback_stripped,
            "original_text": self.original_text,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GuardrailOutcome":
        return cls(
            code_block_detected=data.get("code_block_detected", False),
            rewritten=data.get("rewritten", False),
            fallback_stripped=data.get("fallback_stripped", False),
            original_text=data.get("original_text", ""),
        )


def _fence_positions(text: str) -> list[int]:
    positions = []
    start = 0
    while True:
        idx = text.find(FENCE, start)
        if idx < 0:
            return positions
        positions.append(idx)
        start = idx + len(FENCE)


def contains_code_block(text: str) -> bool:
    """True iff the text holds at least one pair of triple-backtick fences."""
    return len(_fence_positions(text)) >= 2


def strip_code_blocks(text: str) -> str:
    """Delete fenced regions outright, replacing each with a short marker."""
    positions = _fence_positions(text)
    out = []
    cursor = 0
    for open_idx, close_idx in zip(positions[0::2], positions[1::2]):
        out.append(text[cursor:open_idx])
        out.append(STRIP_MARKER)
        cursor = close_idx + len(FENCE)
    out.append(text[cursor:])
    return "".join(out)


def rewrite_response(text: str, llm) -> str:
    """Ask the backend to re-express a code-bearing response in words."""
    request = CompletionRequest(
        messages=[
            PromptMessage(role="system", content=load_rewrite_prompt()),
            PromptMessage(role="user", content=text),
        ],
        model_id=default_model_id(),
    )
    result: CompletionResult = llm.chat(request)
    return result.text


def apply_guardrails(candidate_text: str, llm) -> tuple[str, GuardrailOutcome]:
    """Filter one candidate response; returns (final_text, outcome).

    Clean candidates pass through byte-identical. `rewritten` records that
    the rewrite stage ran, even when its output had to be superseded by the
    mechanical strip.
    """
    outcome = GuardrailOutcome(original_text=candidate_text)
    if not contains_code_block(candidate_text):
        return candidate_text, outcome

    outcome.code_block_detected = True
    outcome.rewritten = True
    try:
        final = rewrite_response(candidate_text, llm)
    except BackendError:
        outcome.fallback_stripped = True
        return strip_code_blocks(candidate_text), outcome

    if contains_code_block(final):
        outcome.fallback_stripped = True
        final = strip_code_blocks(final)
    return final, outcome
