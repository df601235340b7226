"""Persistence for questions and assignments.

Two drivers: an in-memory store for tests and ephemeral deployments, and a
single-file JSON document store that writes the whole document to a temp
file and atomically renames it into place, so an interrupted write leaves
the previous state fully readable.

Student responses are never persisted unless ``persist_responses`` is
enabled; ``record_response`` refuses otherwise.

Writes use compare-and-set on the question version: ``update_question``
succeeds only when the caller's expected version matches the stored one,
and the accepted update bumps the version by exactly one.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Optional

from . import errors
from .domain import Assignment, Question, utcnow


@dataclass(frozen=True)
class ResponseRecord:
    question_id: str
    response_text: str
    feedback_holistic_copy: Optional[str] = None
    received_at: datetime = field(default_factory=utcnow)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "response_text": self.response_text,
            "feedback_holistic_copy": self.feedback_holistic_copy,
            "received_at": self.received_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResponseRecord":
        return cls(
            question_id=d["question_id"],
            response_text=d["response_text"],
            feedback_holistic_copy=d.get("feedback_holistic_copy"),
            received_at=datetime.fromisoformat(d["received_at"]),
        )


class QuestionStore(ABC):
    """Store contract: read-your-writes within a handle, CAS updates."""

    driver_id: str

    def __init__(self, persist_responses: bool = False):
        self.persist_responses = persist_responses
        self._lock = threading.RLock()
        self._questions: dict[str, Question] = {}
        self._assignments: dict[str, Assignment] = {}
        self._responses: list[ResponseRecord] = []

    # -- write-through hook implemented by drivers
    @abstractmethod
    def _flush(self) -> None:
        ...

    def put_question(self, q: Question) -> None:
        with self._lock:
            if q.id in self._questions:
                raise errors.DuplicateId(f"question {q.id} already exists")
            self._questions[q.id] = q
            if q.assignment_id and q.assignment_id in self._assignments:
                a = self._assignments[q.assignment_id]
                if q.id not in a.question_ids:
                    self._assignments[q.assignment_id] = replace(
                        a, question_ids=a.question_ids + (q.id,)
                    )
            self._flush()

    def get_question(self, question_id: str) -> Question:
        with self._lock:
            try:
                return self._questions[question_id]
            except KeyError:
                raise errors.NotFound(f"no question {question_id}") from None

    def update_question(self, q: Question, expected_version: int) -> None:
        with self._lock:
            current = self.get_question(q.id)
            if current.version != expected_version:
                raise errors.VersionConflict(
                    f"question {q.id} is at version {current.version}, "
                    f"caller expected {expected_version}"
                )
            if q.version != expected_version + 1:
                raise errors.VersionConflict(
                    f"update must carry version {expected_version + 1}, got {q.version}"
                )
            self._questions[q.id] = q
            self._flush()

    def list_questions(self, assignment_id: str) -> list[Question]:
        with self._lock:
            a = self.get_assignment(assignment_id)
            return [
                self._questions[qid] for qid in a.question_ids
                if qid in self._questions
            ]

    def put_assignment(self, a: Assignment) -> None:
        with self._lock:
            if a.id in self._assignments:
                raise errors.DuplicateId(f"assignment {a.id} already exists")
            self._assignments[a.id] = a
            self._flush()

    def get_assignment(self, assignment_id: str) -> Assignment:
        with self._lock:
            try:
                return self._assignments[assignment_id]
            except KeyError:
                raise errors.NotFound(f"no assignment {assignment_id}") from None

    def record_response(self, r: ResponseRecord) -> None:
        if not self.persist_responses:
            raise errors.PersistenceDisabled(
                "response persistence is disabled by configuration"
            )
        with self._lock:
            self._responses.append(r)
            self._flush()

    def response_count(self) -> int:
        with self._lock:
            return len(self._responses)


class MemoryStore(QuestionStore):
    driver_id = "memory"

    def _flush(self) -> None:
        pass


class FileStore(QuestionStore):
    """Whole-store JSON document at ``path``, replaced atomically on every
    write. A fresh handle on the same path sees all previously flushed
    state."""

    driver_id = "file"

    def __init__(self, path: str | Path, persist_responses: bool = False):
        super().__init__(persist_responses=persist_responses)
        self.path = Path(path)
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        doc = json.loads(self.path.read_text(encoding="utf-8"))
        self._questions = {
            q["id"]: Question.from_dict(q) for q in doc.get("questions", [])
        }
        self._assignments = {
            a["id"]: Assignment.from_dict(a) for a in doc.get("assignments", [])
        }
        self._responses = [
            ResponseRecord.from_dict(r) for r in doc.get("responses", [])
        ]

    def _flush(self) -> None:
        doc = {
            "questions": [q.to_dict() for q in self._questions.values()],
            "assignments": [a.to_dict() for a in self._assignments.values()],
            "responses": [r.to_dict() for r in self._responses],
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(
            prefix=self.path.name + ".", suffix=".tmp", dir=self.path.parent
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, ensure_ascii=False)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def open_store(
    driver: str, path: Optional[str] = None, persist_responses: bool = False
) -> QuestionStore:
    if driver == "memory":
        return MemoryStore(persist_responses=persist_responses)
    if driver == "file":
        if not path:
            raise ValueError("file driver requires a storage_path")
        return FileStore(path, persist_responses=persist_responses)
    raise ValueError(f"unknown storage driver {driver!r}")
