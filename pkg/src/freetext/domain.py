"""Core entities, validation, and the student-view projection.

All values are immutable after construction; mutation happens only by
producing a new version through storage. Offsets in span annotations are
unicode scalar-value indices (``len``/slicing on Python ``str``), half-open
``[start, end)``.
"""

from __future__ import annotations

import json
import re
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Optional

from . import errors

MAX_QUESTION_CHARS = 10_000
MAX_CRITERION_CHARS = 2_000
MAX_CRITERIA = 50
DEFAULT_RESPONSE_CHAR_CAP = 5_000

_UUID4_RE = re.compile(
    r"^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$"
)


class FeedbackMode(str, Enum):
    HOLISTIC = "holistic"
    SPAN_ONLY = "span_only"
    BOTH = "both"

    @classmethod
    def parse(cls, value) -> "FeedbackMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise errors.ValidationError(
                f"feedback_mode must be one of {[m.value for m in cls]}, got {value!r}"
            ) from None


def new_id() -> str:
    return str(uuid.uuid4())


def is_valid_id(value: str) -> bool:
    return isinstance(value, str) and bool(_UUID4_RE.match(value))


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class Criterion:
    text: str

    def to_dict(self) -> dict:
        return {"text": self.text}


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    criteria: tuple[Criterion, ...]
    feedback_mode: FeedbackMode
    assignment_id: Optional[str]
    version: int
    created_at: datetime

    @property
    def needs_criteria(self) -> bool:
        """Criteria are absent, pending auto-generation."""
        return len(self.criteria) == 0

    def with_text(self, text: str) -> "Question":
        return replace(self, text=text)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "criteria": [c.to_dict() for c in self.criteria],
            "feedback_mode": self.feedback_mode.value,
            "assignment_id": self.assignment_id,
            "version": self.version,
            "created_at": self.created_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Question":
        return cls(
            id=d["id"],
            text=d["text"],
            criteria=tuple(Criterion(c["text"]) for c in d["criteria"]),
            feedback_mode=FeedbackMode.parse(d["feedback_mode"]),
            assignment_id=d.get("assignment_id"),
            version=d["version"],
            created_at=datetime.fromisoformat(d["created_at"]),
        )


@dataclass(frozen=True)
class StudentQuestionView:
    """Projection of a Question safe to hand to students: no criteria."""

    id: str
    text: str
    feedback_mode: FeedbackMode

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "feedback_mode": self.feedback_mode.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


@dataclass(frozen=True)
class StudentResponse:
    question_id: str
    text: str
    received_at: datetime = field(default_factory=utcnow)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "text": self.text,
            "received_at": self.received_at.isoformat(),
        }


@dataclass(frozen=True)
class SpanAnnotation:
    start: int
    end: int
    comment: str

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "comment": self.comment}


@dataclass(frozen=True)
class Feedback:
    holistic: Optional[str]
    spans: tuple[SpanAnnotation, ...]
    unlocated_notes: tuple[tuple[str, str], ...]
    provider_id: str
    latency_ms: int

    def to_dict(self) -> dict:
        return {
            "holistic": self.holistic,
            "spans": [s.to_dict() for s in self.spans],
            "unlocated_notes": [
                {"quote": q, "comment": c} for q, c in self.unlocated_notes
            ],
            "provider_id": self.provider_id,
            "latency_ms": self.latency_ms,
        }


@dataclass(frozen=True)
class Assignment:
    id: str
    title: str
    question_ids: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "question_ids": list(self.question_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Assignment":
        return cls(id=d["id"], title=d["title"], question_ids=tuple(d["question_ids"]))


# --- validation ----------------------------------------------------------

def validate_criterion(text: str) -> Criterion:
    if not isinstance(text, str) or not text.strip():
        raise errors.EmptyCriterionText("criterion text is empty")
    if len(text) > MAX_CRITERION_CHARS:
        raise errors.CriterionTooLong(
            f"criterion exceeds {MAX_CRITERION_CHARS} characters"
        )
    return Criterion(text=text.strip())


def validate_question(
    text: str,
    criteria: list,
    feedback_mode,
    assignment_id: Optional[str] = None,
) -> Question:
    """Validate an instructor draft and mint a fresh version-1 Question."""
    if not isinstance(text, str) or not text.strip():
        raise errors.EmptyQuestionText("question text is empty")
    text = text.strip()
    if len(text) > MAX_QUESTION_CHARS:
        raise errors.QuestionTooLong(
            f"question exceeds {MAX_QUESTION_CHARS} characters"
        )
    criteria = criteria or []
    if len(criteria) > MAX_CRITERIA:
        raise errors.TooManyCriteria(f"at most {MAX_CRITERIA} criteria allowed")
    validated = tuple(
        validate_criterion(c if isinstance(c, str) else c.get("text", ""))
        if not isinstance(c, Criterion)
        else validate_criterion(c.text)
        for c in criteria
    )
    mode = FeedbackMode.parse(feedback_mode)
    if assignment_id is not None and not is_valid_id(assignment_id):
        raise errors.InvalidQuestionId(f"assignment_id {assignment_id!r} is not a UUID")
    return Question(
        id=new_id(),
        text=text,
        criteria=validated,
        feedback_mode=mode,
        assignment_id=assignment_id,
        version=1,
        created_at=utcnow(),
    )


def validate_response(
    question_id: str, text: str, char_cap: int = DEFAULT_RESPONSE_CHAR_CAP
) -> StudentResponse:
    if not isinstance(text, str) or not text.strip():
        raise errors.EmptyResponseText("response text is empty")
    if len(text) > char_cap:
        raise errors.ResponseTooLong(f"response exceeds {char_cap} characters")
    return StudentResponse(question_id=question_id, text=text)


def validate_assignment(title: str, question_ids: list[str]) -> Assignment:
    if not isinstance(title, str) or not title.strip():
        raise errors.ValidationError("assignment title is empty")
    ids = tuple(question_ids or [])
    if len(set(ids)) != len(ids):
        raise errors.DuplicateQuestionId("assignment lists a question twice")
    for qid in ids:
        if not is_valid_id(qid):
            raise errors.InvalidQuestionId(f"{qid!r} is not a UUID")
    return Assignment(id=new_id(), title=title.strip(), question_ids=ids)


def student_view(q: Question) -> StudentQuestionView:
    """Project a Question to its student-safe subset; criteria unreachable."""
    return StudentQuestionView(id=q.id, text=q.text, feedback_mode=q.feedback_mode)


def validate_span(span: SpanAnnotation, response_text: str) -> None:
    """Check 0 <= start < end <= scalar length of the response."""
    n = len(response_text)
    if not (0 <= span.start < span.end <= n):
        raise errors.BoundsError(
            f"span [{span.start}, {span.end}) out of bounds for length {n}"
        )


def validate_feedback(fb: Feedback, mode: FeedbackMode, response_text: str) -> None:
    """Enforce the mode/span invariants on an assembled Feedback."""
    if mode is FeedbackMode.HOLISTIC and fb.spans:
        raise errors.InvalidFeedback("holistic mode forbids spans")
    if mode is FeedbackMode.SPAN_ONLY and fb.holistic is not None:
        raise errors.InvalidFeedback("span-only mode forbids holistic text")
    if mode in (FeedbackMode.HOLISTIC, FeedbackMode.BOTH):
        if not fb.holistic or not fb.holistic.strip():
            raise errors.InvalidFeedback(f"{mode.value} mode requires holistic text")
    if fb.latency_ms < 0:
        raise errors.InvalidFeedback("latency_ms must be non-negative")
    for span in fb.spans:
        validate_span(span, response_text)
