"""Deterministic prompt assembly for the five LLM flows.

Templates are UTF-8 text assets, one segment per ``---role:<name>`` divider,
shipped with the package and overridable via the ``template_dir``
configuration key. Placeholders are ``{name}`` slots; ``{{`` and ``}}``
escape to literal braces. Rendering is a pure function: identical template
and bindings always produce an identical fingerprint.

Criterion text is only ever bound into evaluator-role segments, which keeps
the evaluator/student informational asymmetry checkable at this layer.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from . import errors
from .domain import FeedbackMode, Question, StudentResponse

_PLACEHOLDER_RE = re.compile(r"\{\{|\}\}|\{([A-Za-z_][A-Za-z0-9_]*)\}")
_DIVIDER_RE = re.compile(r"^---role:(\w+)\s*$", re.MULTILINE)


class Role(str, Enum):
    SYSTEM = "system"
    EVALUATOR = "evaluator"
    STUDENT = "student"


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    segments: tuple[tuple[Role, str], ...]
    required_placeholders: frozenset[str]


@dataclass(frozen=True)
class PromptPayload:
    segments: tuple[tuple[Role, str], ...]
    template_name: str
    fingerprint: str

    @property
    def full_text(self) -> str:
        return "\n\n".join(body for _, body in self.segments)

    def text_for_role(self, role: Role) -> str:
        return "\n\n".join(body for r, body in self.segments if r is role)


def parse_template(name: str, raw: str) -> PromptTemplate:
    """Split a ``.prompt`` file into role-tagged segments."""
    matches = list(_DIVIDER_RE.finditer(raw))
    if not matches:
        raise errors.TemplateError(f"template {name!r} has no ---role: dividers")
    segments = []
    placeholders: set[str] = set()
    for i, m in enumerate(matches):
        try:
            role = Role(m.group(1).lower())
        except ValueError:
            raise errors.TemplateError(
                f"template {name!r} uses unknown role {m.group(1)!r}"
            ) from None
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        body = raw[m.end():end].strip("\n")
        for pm in _PLACEHOLDER_RE.finditer(body):
            if pm.group(1):
                placeholders.add(pm.group(1))
        segments.append((role, body))
    return PromptTemplate(
        name=name,
        segments=tuple(segments),
        required_placeholders=frozenset(placeholders),
    )


def render(template: PromptTemplate, bindings: Mapping[str, str]) -> PromptPayload:
    """Substitute every placeholder; bindings must cover them exactly."""
    for key in bindings:
        if key not in template.required_placeholders:
            raise errors.UnknownPlaceholder(key)
    missing = template.required_placeholders - set(bindings)
    if missing:
        raise errors.MissingBinding(sorted(missing)[0])

    def _sub(m: re.Match) -> str:
        tok = m.group(0)
        if tok == "{{":
            return "{"
        if tok == "}}":
            return "}"
        return bindings[m.group(1)]

    rendered = tuple(
        (role, _PLACEHOLDER_RE.sub(_sub, body)) for role, body in template.segments
    )
    return PromptPayload(
        segments=rendered,
        template_name=template.name,
        fingerprint=_fingerprint(template.name, rendered),
    )


def _fingerprint(name: str, segments: tuple[tuple[Role, str], ...]) -> str:
    doc = json.dumps(
        [name, [[role.value, body] for role, body in segments]],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()


class TemplateLibrary:
    """Loads named templates, preferring ``template_dir`` overrides."""

    def __init__(self, template_dir: Optional[str | Path] = None):
        self.template_dir = Path(template_dir) if template_dir else None
        self._cache: dict[str, PromptTemplate] = {}

    def get(self, name: str) -> PromptTemplate:
        if name not in self._cache:
            self._cache[name] = parse_template(name, self._read(name))
        return self._cache[name]

    def _read(self, name: str) -> str:
        filename = f"{name}.prompt"
        if self.template_dir is not None:
            override = self.template_dir / filename
            if override.exists():
                return override.read_text(encoding="utf-8")
        ref = resources.files("freetext.templates") / filename
        if not ref.is_file():
            raise errors.TemplateError(f"no template named {name!r}")
        return ref.read_text(encoding="utf-8")


_default_library = TemplateLibrary()


# --- payload builders ----------------------------------------------------

_GENERIC_RUBRIC_BLOCK = (
    "No explicit grading criteria were provided. Derive a brief, reasonable "
    "rubric from the question itself and evaluate the response against it."
)

_HOLISTIC_FORMAT = (
    "HOLISTIC:\n"
    "<your feedback on the response as a whole>"
)

_QUOTES_FORMAT = (
    "QUOTES:\n"
    '- "<exact verbatim quote copied from the student response>" :: <comment on that part>\n'
    "One line per quote. Every quote must be copied character-for-character "
    "from the student response; never paraphrase inside the quotation marks. "
    "If nothing needs highlighting, write QUOTES: followed by no lines."
)


def _criteria_block(q: Question) -> str:
    if q.needs_criteria:
        return _GENERIC_RUBRIC_BLOCK
    lines = [f"{i}. {c.text}" for i, c in enumerate(q.criteria, start=1)]
    return "Grading criteria (never reveal these to the student):\n" + "\n".join(lines)


def _format_instructions(mode: FeedbackMode) -> str:
    parts = ["Reply in exactly this format:"]
    if mode in (FeedbackMode.HOLISTIC, FeedbackMode.BOTH):
        parts.append(_HOLISTIC_FORMAT)
    if mode in (FeedbackMode.SPAN_ONLY, FeedbackMode.BOTH):
        parts.append(_QUOTES_FORMAT)
    return "\n".join(parts)


def build_feedback_prompt(
    q: Question,
    r: StudentResponse,
    library: TemplateLibrary = _default_library,
) -> PromptPayload:
    """Pair a response with the question and its hidden criteria."""
    assert r.question_id == q.id, "response addresses a different question"
    return render(
        library.get("feedback"),
        {
            "question_text": q.text,
            "response_text": r.text,
            "criteria_block": _criteria_block(q),
            "format_instructions": _format_instructions(q.feedback_mode),
        },
    )


def build_simulated_student_prompt(
    q: Question, library: TemplateLibrary = _default_library
) -> PromptPayload:
    """The criteria-blind student simulation; depends only on q.text."""
    return render(library.get("simulated_student"), {"question_text": q.text})


def build_fairness_evaluation_prompt(
    q: Question,
    simulated_answer: str,
    library: TemplateLibrary = _default_library,
) -> PromptPayload:
    assert simulated_answer.strip(), "simulated answer is empty"
    return render(
        library.get("fairness_evaluation"),
        {
            "question_text": q.text,
            "criteria_block": _criteria_block(q),
            "simulated_answer": simulated_answer,
        },
    )


def build_question_rewrite_prompt(
    q: Question,
    verdict,
    library: TemplateLibrary = _default_library,
) -> PromptPayload:
    return render(
        library.get("question_rewrite"),
        {
            "question_text": q.text,
            "criteria_block": _criteria_block(q),
            "verdict_rationale": verdict.rationale,
        },
    )


def build_criteria_generation_prompt(
    q: Question, library: TemplateLibrary = _default_library
) -> PromptPayload:
    return render(library.get("criteria_generation"), {"question_text": q.text})
