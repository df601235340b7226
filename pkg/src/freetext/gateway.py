"""Provider abstraction over completion backends plus completion parsers.

A provider is anything with an ``identity`` string and a
``complete(payload, params) -> Completion`` method. The gateway's
:func:`complete` wrapper owns wall-clock latency measurement, timeout
enforcement, and bounded retries; retries fire only on transport-class
errors, never on deterministic failures or parse errors.

Span feedback works by asking the model for verbatim quotes and locating
them server-side (first occurrence by scalar index); models emit unreliable
numeric offsets, quotes are checkable. Quotes that cannot be located
degrade to ``unlocated_notes`` rather than failing the request.
"""

from __future__ import annotations

import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, runtime_checkable

from . import errors
from .domain import Criterion, Feedback, FeedbackMode, SpanAnnotation
from .domain import validate_criterion, validate_feedback
from .prompts import PromptPayload, Role


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.2
    max_output_chars: int = 20_000
    timeout_ms: int = 30_000
    retries: int = 2

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_output_chars <= 0 or self.timeout_ms <= 0:
            raise ValueError("max_output_chars and timeout_ms must be positive")
        if self.retries < 0:
            raise ValueError("retries must be non-negative")


@dataclass(frozen=True)
class Completion:
    text: str
    provider_id: str
    latency_ms: int


@dataclass(frozen=True)
class FairnessVerdict:
    fair: bool
    rationale: str

    def __post_init__(self):
        if not self.fair and not self.rationale.strip():
            raise ValueError("an unfair verdict requires a rationale")

    def to_dict(self) -> dict:
        return {"fair": self.fair, "rationale": self.rationale}


@runtime_checkable
class LLMProvider(Protocol):
    identity: str

    def complete(self, payload: PromptPayload, params: GenerationParams) -> Completion:
        ...


def complete(
    provider: LLMProvider,
    payload: PromptPayload,
    params: GenerationParams = GenerationParams(),
) -> Completion:
    """Call a provider with timeout enforcement and transport-level retries."""
    if not payload.segments:
        raise ValueError("payload has no segments")
    last_error: Optional[errors.ProviderError] = None
    for attempt in range(params.retries + 1):
        started = time.monotonic()
        try:
            result = _call_with_timeout(provider, payload, params)
        except errors.ProviderError as exc:
            last_error = exc
            if not exc.retryable:
                raise
            continue
        latency_ms = int((time.monotonic() - started) * 1000)
        if len(result.text) > params.max_output_chars:
            raise errors.OutputTooLong(
                f"completion of {len(result.text)} chars exceeds "
                f"{params.max_output_chars}"
            )
        return Completion(
            text=result.text, provider_id=result.provider_id, latency_ms=latency_ms
        )
    assert last_error is not None
    raise last_error


def _call_with_timeout(
    provider: LLMProvider, payload: PromptPayload, params: GenerationParams
) -> Completion:
    pool = ThreadPoolExecutor(max_workers=1)
    future = pool.submit(provider.complete, payload, params)
    try:
        return future.result(timeout=params.timeout_ms / 1000)
    except FutureTimeout:
        # don't wait for the hung worker; abandon it
        pool.shutdown(wait=False)
        raise errors.ProviderTimeout(
            f"provider {provider.identity!r} exceeded {params.timeout_ms} ms"
        ) from None
    finally:
        pool.shutdown(wait=False)


# --- scripted provider ---------------------------------------------------

@dataclass(frozen=True)
class ScriptEntry:
    matcher: str  # payload fingerprint, or a substring of the rendered text
    completion_text: str

    def matches(self, payload: PromptPayload) -> bool:
        return self.matcher == payload.fingerprint or self.matcher in payload.full_text


@dataclass(frozen=True)
class ScriptTable:
    entries: tuple[ScriptEntry, ...]
    strict: bool = False

    @classmethod
    def of(cls, *pairs: tuple[str, str], strict: bool = False) -> "ScriptTable":
        return cls(entries=tuple(ScriptEntry(m, t) for m, t in pairs), strict=strict)


class ScriptedProvider:
    """Deterministic provider answering from a canned script table.

    Records a transcript of served payloads for test assertions; transcript
    access is serialized so the provider is safe under concurrent requests.
    """

    identity = "scripted"

    def __init__(self, script: ScriptTable):
        self.script = script
        self._lock = threading.Lock()
        self._transcript: list[PromptPayload] = []

    @property
    def transcript(self) -> list[PromptPayload]:
        with self._lock:
            return list(self._transcript)

    @property
    def call_count(self) -> int:
        with self._lock:
            return len(self._transcript)

    def complete(self, payload: PromptPayload, params: GenerationParams) -> Completion:
        with self._lock:
            self._transcript.append(payload)
        hits = [e for e in self.script.entries if e.matches(payload)]
        if not hits:
            raise errors.ProviderUnavailable(
                f"ScriptMiss: no entry matches payload {payload.fingerprint[:12]}",
                retryable=False,
            )
        if self.script.strict and len(hits) > 1:
            raise errors.ProviderUnavailable(
                f"ScriptMiss: {len(hits)} entries match payload "
                f"{payload.fingerprint[:12]} in strict mode",
                retryable=False,
            )
        return Completion(text=hits[0].completion_text, provider_id=self.identity,
                          latency_ms=0)


def make_scripted_provider(script: ScriptTable) -> ScriptedProvider:
    return ScriptedProvider(script)


class FlakyProvider:
    """Fault-injection wrapper: fails with transport errors N times, then
    delegates. Test harness only."""

    def __init__(self, inner: LLMProvider, failures: int):
        self.inner = inner
        self.identity = inner.identity
        self.failures_left = failures
        self.fault_events = 0

    def complete(self, payload: PromptPayload, params: GenerationParams) -> Completion:
        if self.failures_left > 0:
            self.failures_left -= 1
            self.fault_events += 1
            raise errors.ProviderUnavailable("injected transport fault", retryable=True)
        return self.inner.complete(payload, params)


# --- HTTP chat-completions adapter ---------------------------------------

_ROLE_MAP = {Role.SYSTEM: "system", Role.EVALUATOR: "system", Role.STUDENT: "user"}


class HttpChatProvider:
    """Adapter for chat-completions style HTTP APIs.

    Sends a role+content message list; endpoint, model, and key come from
    configuration. The key is never logged and never appears in errors.
    Exercised only in optional integration runs; tests use the scripted
    provider.
    """

    def __init__(self, endpoint: str, model: str, api_key: str = "",
                 identity: str = "http"):
        import httpx

        self.identity = identity
        self._endpoint = endpoint
        self._model = model
        self._client = httpx.Client(
            headers={"Authorization": f"Bearer {api_key}"} if api_key else {}
        )

    def complete(self, payload: PromptPayload, params: GenerationParams) -> Completion:
        import httpx

        messages = [
            {"role": _ROLE_MAP[role], "content": body}
            for role, body in payload.segments
        ]
        try:
            resp = self._client.post(
                self._endpoint,
                json={
                    "model": self._model,
                    "messages": messages,
                    "temperature": params.temperature,
                },
                timeout=params.timeout_ms / 1000,
            )
        except httpx.TimeoutException:
            raise errors.ProviderTimeout("HTTP provider timed out") from None
        except httpx.HTTPError as exc:
            raise errors.ProviderUnavailable(
                f"transport failure: {type(exc).__name__}", retryable=True
            ) from None
        if resp.status_code >= 500:
            raise errors.ProviderUnavailable(
                f"provider returned {resp.status_code}", retryable=True
            )
        if resp.status_code >= 400:
            raise errors.ProviderUnavailable(
                f"provider rejected request with {resp.status_code}", retryable=False
            )
        text = resp.json()["choices"][0]["message"]["content"]
        return Completion(text=text, provider_id=self.identity, latency_ms=0)


# --- completion parsers --------------------------------------------------

def locate_span(haystack: str, quote: str) -> tuple[int, int]:
    """First occurrence of quote by unicode scalar index, half-open."""
    if not quote:
        raise ValueError("quote is empty")
    start = haystack.find(quote)
    if start < 0:
        raise errors.NotFound(f"quote not present: {quote[:60]!r}")
    return start, start + len(quote)


_HOLISTIC_RE = re.compile(
    r"^HOLISTIC:\s*\n?(.*?)(?=^QUOTES:|^VERDICT:|\Z)",
    re.MULTILINE | re.DOTALL | re.IGNORECASE,
)
_QUOTES_HEADER_RE = re.compile(r"^QUOTES:\s*$", re.MULTILINE | re.IGNORECASE)
_QUOTE_LINE_RE = re.compile(r'^\s*(?:[-*]|\d+[.)])?\s*"(.+?)"\s*::\s*(.+?)\s*$')
_VERDICT_RE = re.compile(r"^VERDICT:\s*(fair|unfair)\b", re.MULTILINE | re.IGNORECASE)
_RATIONALE_RE = re.compile(
    r"^RATIONALE:\s*(.+?)\s*\Z", re.MULTILINE | re.DOTALL | re.IGNORECASE
)
_NUMBERED_LINE_RE = re.compile(r"^\s*(?:\d+[.)]|[-*])\s+(.+?)\s*$")


def _extract_quotes(text: str) -> list[tuple[str, str]]:
    header = _QUOTES_HEADER_RE.search(text)
    if header is None:
        return []
    quotes = []
    for line in text[header.end():].splitlines():
        if not line.strip():
            continue
        m = _QUOTE_LINE_RE.match(line)
        if m is None:
            break  # block ended; tolerate trailing prose
        quotes.append((m.group(1), m.group(2)))
    return quotes


def parse_feedback(
    raw: Completion, mode: FeedbackMode, response_text: str
) -> Feedback:
    """Turn a raw completion into domain Feedback for the given mode.

    Quotes that do not occur verbatim in the response are reported in
    ``unlocated_notes``, never dropped silently.
    """
    holistic: Optional[str] = None
    m = _HOLISTIC_RE.search(raw.text)
    if m and m.group(1).strip():
        holistic = m.group(1).strip()

    if mode in (FeedbackMode.HOLISTIC, FeedbackMode.BOTH) and holistic is None:
        raise errors.UnparseableCompletion("no HOLISTIC block in completion")
    if mode is FeedbackMode.SPAN_ONLY:
        holistic = None
        if _QUOTES_HEADER_RE.search(raw.text) is None:
            raise errors.UnparseableCompletion("no QUOTES block in completion")

    spans: list[SpanAnnotation] = []
    unlocated: list[tuple[str, str]] = []
    if mode in (FeedbackMode.SPAN_ONLY, FeedbackMode.BOTH):
        for quote, comment in _extract_quotes(raw.text):
            try:
                start, end = locate_span(response_text, quote)
            except errors.NotFound:
                unlocated.append((quote, comment))
            else:
                spans.append(SpanAnnotation(start=start, end=end, comment=comment))

    fb = Feedback(
        holistic=holistic,
        spans=tuple(spans),
        unlocated_notes=tuple(unlocated),
        provider_id=raw.provider_id,
        latency_ms=raw.latency_ms,
    )
    validate_feedback(fb, mode, response_text)
    return fb


def parse_verdict(raw: Completion) -> FairnessVerdict:
    m = _VERDICT_RE.search(raw.text)
    if m is None:
        raise errors.UnparseableCompletion("no VERDICT block in completion")
    fair = m.group(1).lower() == "fair"
    rm = _RATIONALE_RE.search(raw.text)
    rationale = rm.group(1).strip() if rm else ""
    if not fair and not rationale:
        raise errors.UnparseableCompletion("unfair verdict lacks a rationale")
    return FairnessVerdict(fair=fair, rationale=rationale)


def parse_criteria_list(raw: Completion, limit: int = 5) -> list[Criterion]:
    """Parse up to ``limit`` enumerated lines into Criterion values."""
    items = []
    for line in raw.text.splitlines():
        m = _NUMBERED_LINE_RE.match(line)
        if m:
            items.append(validate_criterion(m.group(1)))
    if not items:
        raise errors.UnparseableCompletion("no enumerated criteria in completion")
    return items[:limit]
