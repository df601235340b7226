from pathlib import Path

import pytest

from freetext import domain, gateway, prompts
from freetext.gateway import ScriptTable

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def snapshot_check():
    """Golden-file comparison for rendered payloads: first run freezes the
    snapshot, later runs must match it byte for byte."""

    def check(name: str, payload):
        path = GOLDEN_DIR / f"{name}.txt"
        rendered = "\n".join(
            f"== {role.value} ==\n{body}" for role, body in payload.segments
        )
        if not path.exists():
            GOLDEN_DIR.mkdir(exist_ok=True)
            path.write_text(rendered, encoding="utf-8")
        assert path.read_text(encoding="utf-8") == rendered, (
            f"rendered payload drifted from frozen snapshot {path.name}"
        )

    return check

ROSETTA_TEXT = "What is the Rosetta Stone?"
ROSETTA_CRITERION = "Mention why the Ptolemaic dynasty created the Rosetta Stone"
ROSETTA_REWRITE = "Explain what the Rosetta Stone is and the context of its creation"
LEAKY_REWRITE = "Explain why the Ptolemaic dynasty created the Rosetta Stone"

SIM_ANSWER = "The Rosetta Stone is a granodiorite stele bearing one decree in three scripts."


@pytest.fixture
def rosetta_question():
    return domain.validate_question(
        ROSETTA_TEXT, [ROSETTA_CRITERION], domain.FeedbackMode.BOTH
    )


@pytest.fixture
def dna_question():
    return domain.validate_question(
        "Explain DNA base pairing.",
        ["Make sure the student mentions DNA base pairs in their answer"],
        domain.FeedbackMode.BOTH,
    )


def verdict_completion(fair: bool, rationale: str) -> str:
    return f"VERDICT: {'fair' if fair else 'unfair'}\nRATIONALE: {rationale}"


def improvement_script(q, rewrite_text=ROSETTA_REWRITE) -> ScriptTable:
    """Fingerprint-matched script driving unfair -> rewrite -> fair.

    Round 0 evaluates unfair and rewrites; round 1 (on the rewritten text)
    evaluates fair. Built by precomputing each payload's fingerprint, which
    also exercises deterministic rendering.
    """
    rationale = "the question never asks about the stone's origin"
    eval0 = prompts.build_fairness_evaluation_prompt(q, SIM_ANSWER)
    rewrite0 = prompts.build_question_rewrite_prompt(
        q, gateway.FairnessVerdict(fair=False, rationale=rationale)
    )
    q1 = q.with_text(rewrite_text)
    eval1 = prompts.build_fairness_evaluation_prompt(q1, SIM_ANSWER)
    return ScriptTable.of(
        ("diligent student", SIM_ANSWER),
        (eval0.fingerprint, verdict_completion(False, rationale)),
        (rewrite0.fingerprint, rewrite_text),
        (eval1.fingerprint, verdict_completion(True, "the reworded question covers it")),
    )


def fair_at_start_script() -> ScriptTable:
    return ScriptTable.of(
        ("diligent student", SIM_ANSWER),
        ("unfairly penalized", verdict_completion(True, "question conveys everything")),
    )


def always_unfair_script(rewrite_text="Describe this artifact in full detail.") -> ScriptTable:
    return ScriptTable.of(
        ("diligent student", SIM_ANSWER),
        ("unfairly penalized", verdict_completion(False, "requirements stay hidden")),
        ("rewritten question text", rewrite_text),
    )


FEEDBACK_COMPLETION = (
    "HOLISTIC:\n"
    "Solid definition. Say more about why the stone was made.\n"
    "QUOTES:\n"
    '- "granodiorite stele" :: Good use of precise terminology.\n'
)


def feedback_script(completion_text=FEEDBACK_COMPLETION) -> ScriptTable:
    return ScriptTable.of(("Student response:", completion_text))
