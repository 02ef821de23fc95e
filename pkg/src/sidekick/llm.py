"""Chat-completion backends: a production HTTP adapter and a scripted mock.

Backend selection comes from SIDEKICK_LLM_BACKEND (`mock` or
`openai-compatible`). The mock performs no network I/O and replays either a
FIFO script or responses keyed by a hash of the request, which makes every
test deterministic and offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

from .prompts import PromptMessage

DEFAULT_TEMPERATURE = 0.7
DEFAULT_MAX_OUTPUT_TOKENS = 512
DEFAULT_TIMEOUT_S = 30.0
MAX_RETRIES = 2  # total attempts <= 3


class BackendError(Exception):
    """The completion backend failed to produce a usable response."""


@dataclass
class CompletionRequest:
    messages: list[PromptMessage]
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    model_id: str = "default"

    def validate(self) -> None:
        if not self.messages:
            raise ValueError("completion request needs at least one message")
        if self.messages[0].role != "system":
            raise ValueError("first message must be the system message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range: {self.temperature}")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")

    def request_hash(self) -> str:
        canonical = json.dumps(
            [{"role": m.role, "content": m.content} for m in self.messages],
            sort_keys=True,
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class CompletionResult:
    text: str
    backend_latency_ms: int = 0
    token_counts: tuple[int, int] | None = None


class MockBackend:
    """Deterministic scripted backend for tests and offline use.

    Responses come from a FIFO script, a request-hash keyed table, or a
    callable, in that order of precedence. Every request received is
    recorded so tests can assert on the exact prompts sent.
    """

    def __init__(self, script=None, keyed=None, responder=None, default=None):
        self.script: list[str] = list(script or [])
        self.keyed: dict[str, str] = dict(keyed or {})
        self.responder = responder
        self.default = default
        self.requests: list[CompletionRequest] = []

    @classmethod
    def from_script_file(cls, path) -> "MockBackend":
        """Load a newline-delimited JSON script: each line is either a JSON
        string or an object with a `text` field."""
        script = []
        with open(path) as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                item = json.loads(line)
                script.append(item if isinstance(item, str) else item["text"])
        return cls(script=script)

    def chat(self, req: CompletionRequest) -> CompletionResult:
        req.validate()
        self.requests.append(req)
        if self.script:
            return CompletionResult(text=self.script.pop(0))
        key = req.request_hash()
        if key in self.keyed:
            return CompletionResult(text=self.keyed[key])
        if self.responder is not None:
            return CompletionResult(text=self.responder(req))
        if self.default is not None:
            return CompletionResult(text=self.default)
        raise BackendError("mock script exhausted")


class OpenAICompatBackend:
    """Speaks the de-facto chat-completions wire format over HTTPS."""

    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        timeout: float = DEFAULT_TIMEOUT_S,
        max_retries: int = MAX_RETRIES,
        backoff_s: float = 0.5,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_s = backoff_s

    def _url(self) -> str:
        if self.endpoint.endswith("/chat/completions"):
            return self.endpoint
        return self.endpoint + "/chat/completions"

    def chat(self, req: CompletionRequest) -> CompletionResult:
        import httpx

        req.validate()
        body = {
            "model": req.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
            started = time.monotonic()
            try:
                response = httpx.post(
                    self._url(), json=body, headers=headers, timeout=self.timeout
                )
            except httpx.HTTPError as exc:
                last_error = BackendError(f"request failed: {exc}")
                continue
            latency_ms = int((time.monotonic() - started) * 1000)
            if response.status_code in (429,) or response.status_code >= 500:
                last_error = BackendError(f"backend returned {response.status_code}")
                continue
            if response.status_code != 200:
                raise BackendError(f"backend returned {response.status_code}")
            try:
                payload = response.json()
                text = payload["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed completion body: {exc}") from exc
            token_counts = None
            usage = payload.get("usage")
            if isinstance(usage, dict):
                prompt = usage.get("prompt_tokens")
                completion = usage.get("completion_tokens")
                if prompt is not None and completion is not None:
                    token_counts = (prompt, completion)
            return CompletionResult(
                text=text, backend_latency_ms=latency_ms, token_counts=token_counts
            )
        raise last_error if last_error else BackendError("request failed")


def default_model_id() -> str:
    return os.environ.get("SIDEKICK_MODEL_ID", "default")


def backend_from_env():
    """Build the backend the environment asks for (default: mock)."""
    name = os.environ.get("SIDEKICK_LLM_BACKEND", "mock").lower()
    if name == "mock":
        script = os.environ.get("SIDEKICK_MOCK_SCRIPT")
        if script:
            return MockBackend.from_script_file(script)
        return MockBackend(
            default="This is a scripted placeholder explanation. Configure "
            "SIDEKICK_LLM_BACKEND=openai-compatible for real completions."
        )
    if name == "openai-compatible":
        endpoint = os.environ.get("SIDEKICK_LLM_ENDPOINT", "")
        if not endpoint:
            raise BackendError("SIDEKICK_LLM_ENDPOINT is required for the openai-compatible backend")
        return OpenAICompatBackend(endpoint, api_key=os.environ.get("SIDEKICK_LLM_API_KEY", ""))
    raise BackendError(f"unknown SIDEKICK_LLM_BACKEND {name!r}")
