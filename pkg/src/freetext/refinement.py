"""Criteria auto-generation and the question-improvement loop.

Each refinement round simulates a criteria-blind student, has a separate
completion judge whether that student was unfairly penalized, and, when the
verdict is unfair, rewrites the question for the next round. The loop is
pure with respect to storage: adopting the final text is the caller's
single explicit write.

Rewrites are leak-screened: any verbatim criterion substring of at least
``LEAK_MIN_CHARS`` scalars that appears in the rewrite but not in the text
being rewritten counts as revealed criterion content, rejects the rewrite,
and ends the loop Unresolved. This is the mechanically checkable slice of
"a rewrite must not add information"; semantic leakage is not detectable
here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from . import errors, gateway, prompts
from .domain import Criterion, Question
from .gateway import FairnessVerdict, GenerationParams, LLMProvider
from .prompts import TemplateLibrary

DEFAULT_MAX_ROUNDS = 3
LEAK_MIN_CHARS = 12


class Outcome(str, Enum):
    FAIR_AT_START = "FairAtStart"
    IMPROVED = "Improved"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class RefinementRound:
    round_index: int
    simulated_answer: str
    verdict: FairnessVerdict
    rewritten_text: Optional[str]

    def to_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "simulated_answer": self.simulated_answer,
            "verdict": self.verdict.to_dict(),
            "rewritten_text": self.rewritten_text,
        }


@dataclass(frozen=True)
class RefinementReport:
    question_id: str
    initial_text: str
    final_text: str
    rounds: tuple[RefinementRound, ...]
    outcome: Outcome

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "initial_text": self.initial_text,
            "final_text": self.final_text,
            "rounds": [r.to_dict() for r in self.rounds],
            "outcome": self.outcome.value,
        }


def rewrite_leaks_criteria(
    rewrite_text: str,
    criteria: tuple[Criterion, ...],
    baseline_text: str,
    min_chars: int = LEAK_MIN_CHARS,
) -> bool:
    """True when the rewrite contains a criterion substring absent from the
    text it replaces, i.e. it hands the student new criterion content.

    Checks every ``min_chars``-scalar window of each criterion; any longer
    verbatim leak necessarily contains such a window.
    """
    for criterion in criteria:
        text = criterion.text
        for i in range(len(text) - min_chars + 1):
            window = text[i : i + min_chars]
            if window in rewrite_text and window not in baseline_text:
                return True
    return False


def generate_criteria(
    q: Question,
    provider: LLMProvider,
    params: GenerationParams = GenerationParams(),
    library: TemplateLibrary = prompts._default_library,
) -> list[Criterion]:
    """Propose 1-5 criteria for a question that has none. Does not mutate
    the question; the caller persists a new version after review."""
    if not q.needs_criteria:
        raise errors.CriteriaAlreadyPresent(
            f"question {q.id} already has {len(q.criteria)} criteria"
        )
    payload = prompts.build_criteria_generation_prompt(q, library)
    completion = gateway.complete(provider, payload, params)
    return gateway.parse_criteria_list(completion)


def refine_question(
    q: Question,
    provider: LLMProvider,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    evaluator_provider: Optional[LLMProvider] = None,
    params: GenerationParams = GenerationParams(),
    library: TemplateLibrary = prompts._default_library,
) -> RefinementReport:
    """Run the bounded simulate -> evaluate -> rewrite loop.

    ``evaluator_provider`` optionally routes the fairness judgment to a
    distinct backend; by default the same provider serves both roles in
    separate calls.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if q.needs_criteria:
        raise errors.FreetextError("refinement requires at least one criterion")
    evaluator = evaluator_provider or provider

    rounds: list[RefinementRound] = []
    current = q

    def _report(outcome: Outcome) -> RefinementReport:
        return RefinementReport(
            question_id=q.id,
            initial_text=q.text,
            final_text=current.text,
            rounds=tuple(rounds),
            outcome=outcome,
        )

    for round_index in range(max_rounds):
        try:
            sim_payload = prompts.build_simulated_student_prompt(current, library)
            simulated = gateway.complete(provider, sim_payload, params).text
            eval_payload = prompts.build_fairness_evaluation_prompt(
                current, simulated, library
            )
            verdict = gateway.parse_verdict(
                gateway.complete(evaluator, eval_payload, params)
            )
            if verdict.fair:
                rounds.append(RefinementRound(round_index, simulated, verdict, None))
                return _report(
                    Outcome.FAIR_AT_START if round_index == 0 else Outcome.IMPROVED
                )
            if round_index == max_rounds - 1:
                # no rewrite allowance left
                rounds.append(RefinementRound(round_index, simulated, verdict, None))
                return _report(Outcome.UNRESOLVED)
            rewrite_payload = prompts.build_question_rewrite_prompt(
                current, verdict, library
            )
            rewritten = gateway.complete(provider, rewrite_payload, params).text.strip()
        except errors.FreetextError as exc:
            raise errors.RefinementError(exc, _report(Outcome.UNRESOLVED)) from exc

        if not rewritten or rewrite_leaks_criteria(
            rewritten, current.criteria, current.text
        ):
            rounds.append(RefinementRound(round_index, simulated, verdict, None))
            return _report(Outcome.UNRESOLVED)
        rounds.append(RefinementRound(round_index, simulated, verdict, rewritten))
        current = current.with_text(rewritten)

    return _report(Outcome.UNRESOLVED)
