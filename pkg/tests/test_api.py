import pytest
from fastapi.testclient import TestClient

from freetext import domain, gateway
from freetext.api import ServiceConfig, create_app
from freetext.storage import FileStore, MemoryStore

from conftest import (
    ROSETTA_CRITERION,
    ROSETTA_REWRITE,
    ROSETTA_TEXT,
    always_unfair_script,
    fair_at_start_script,
    feedback_script,
)

TOKEN = "test-token-123"
AUTH = {"Authorization": f"Bearer {TOKEN}"}


def make_client(script=None, store=None, **config_kwargs):
    provider = gateway.make_scripted_provider(script or feedback_script())
    config = ServiceConfig(api_token=TOKEN, **config_kwargs)
    app = create_app(config, store=store or MemoryStore(), provider=provider)
    return TestClient(app, raise_server_exceptions=False)


def create_rosetta(client, mode="both"):
    resp = client.post(
        "/questions",
        json={
            "text": ROSETTA_TEXT,
            "criteria": [ROSETTA_CRITERION],
            "feedback_mode": mode,
        },
        headers=AUTH,
    )
    assert resp.status_code == 201
    return resp.json()["question_id"]


class TestAuth:
    def test_missing_token_401(self):
        client = make_client()
        resp = client.post("/questions", json={"text": "Q?"})
        assert resp.status_code == 401
        assert resp.json()["error"] == "Unauthorized"

    def test_wrong_token_401(self):
        client = make_client()
        resp = client.post(
            "/questions",
            json={"text": "Q?"},
            headers={"Authorization": "Bearer nope"},
        )
        assert resp.status_code == 401

    def test_token_absent_from_error_bodies(self):
        client = make_client()
        for resp in [
            client.post("/questions", json={"text": "Q?"}),
            client.post("/questions", json={"text": ""}, headers=AUTH),
            client.get("/questions/" + domain.new_id()),
        ]:
            assert TOKEN not in resp.text

    def test_student_routes_need_no_token(self):
        client = make_client()
        qid = create_rosetta(client)
        assert client.get(f"/questions/{qid}").status_code == 200


class TestQuestionRoutes:
    def test_create_returns_uuid(self):
        client = make_client()
        qid = create_rosetta(client)
        assert domain.is_valid_id(qid)

    def test_create_empty_text_422(self):
        client = make_client()
        resp = client.post(
            "/questions", json={"text": "  ", "feedback_mode": "holistic"}, headers=AUTH
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "EmptyQuestionText"

    def test_wrong_content_type_415(self):
        client = make_client()
        resp = client.post(
            "/questions", content="text=Q", headers={**AUTH, "Content-Type": "text/plain"}
        )
        assert resp.status_code == 415

    def test_student_view_has_no_criteria(self):
        client = make_client()
        qid = create_rosetta(client)
        resp = client.get(f"/questions/{qid}")
        assert resp.status_code == 200
        body = resp.json()
        assert set(body) == {"id", "text", "feedback_mode"}
        assert ROSETTA_CRITERION.encode() not in resp.content
        assert b"Ptolemaic" not in resp.content

    def test_unknown_question_404(self):
        client = make_client()
        resp = client.get(f"/questions/{domain.new_id()}")
        assert resp.status_code == 404
        assert resp.json()["error"] == "NotFound"

    def test_put_updates_with_cas(self):
        client = make_client()
        qid = create_rosetta(client)
        resp = client.put(
            f"/questions/{qid}",
            json={"text": ROSETTA_REWRITE, "expected_version": 1},
            headers=AUTH,
        )
        assert resp.status_code == 200
        assert resp.json()["version"] == 2
        assert client.get(f"/questions/{qid}").json()["text"] == ROSETTA_REWRITE

    def test_put_stale_version_409(self):
        client = make_client()
        qid = create_rosetta(client)
        client.put(
            f"/questions/{qid}",
            json={"text": "New?", "expected_version": 1},
            headers=AUTH,
        )
        resp = client.put(
            f"/questions/{qid}",
            json={"text": "Other?", "expected_version": 1},
            headers=AUTH,
        )
        assert resp.status_code == 409
        assert resp.json()["error"] == "VersionConflict"


class TestResponses:
    def test_feedback_end_to_end(self):
        client = make_client()
        qid = create_rosetta(client)
        response_text = "It is a granodiorite stele from Egypt."
        resp = client.post(
            f"/questions/{qid}/responses", json={"response_text": response_text}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["holistic"]
        assert body["provider_id"] == "scripted"
        assert body["latency_ms"] >= 0
        (span,) = body["spans"]
        assert response_text[span["start"] : span["end"]] == "granodiorite stele"

    def test_over_cap_422(self):
        client = make_client(response_char_cap=10)
        qid = create_rosetta(client)
        resp = client.post(
            f"/questions/{qid}/responses", json={"response_text": "x" * 11}
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "ResponseTooLong"

    def test_provider_miss_503(self):
        client = make_client(script=gateway.ScriptTable.of())
        qid = create_rosetta(client)
        resp = client.post(
            f"/questions/{qid}/responses", json={"response_text": "an answer"}
        )
        assert resp.status_code == 503
        assert resp.json()["error"] == "ProviderUnavailable"

    def test_responses_not_persisted_by_default(self, tmp_path):
        store = FileStore(tmp_path / "store.json")
        client = make_client(store=store)
        qid = create_rosetta(client)
        before = (tmp_path / "store.json").read_bytes()
        for _ in range(5):
            client.post(f"/questions/{qid}/responses", json={"response_text": "ans"})
        assert (tmp_path / "store.json").read_bytes() == before
        assert store.response_count() == 0

    def test_responses_persisted_when_enabled(self, tmp_path):
        store = FileStore(tmp_path / "store.json", persist_responses=True)
        client = make_client(store=store, persist_responses=True)
        qid = create_rosetta(client)
        client.post(f"/questions/{qid}/responses", json={"response_text": "ans"})
        assert store.response_count() == 1


class TestRefineRoutes:
    def test_refine_returns_report_without_persisting(self):
        client = make_client(script=fair_at_start_script())
        qid = create_rosetta(client)
        resp = client.post(f"/questions/{qid}/refine", json={}, headers=AUTH)
        assert resp.status_code == 200
        body = resp.json()
        assert body["outcome"] == "FairAtStart"
        assert body["final_text"] == ROSETTA_TEXT
        # adoption is a separate PUT; stored text unchanged
        assert client.get(f"/questions/{qid}").json()["text"] == ROSETTA_TEXT

    def test_refine_requires_auth(self):
        client = make_client(script=fair_at_start_script())
        qid = create_rosetta(client)
        assert client.post(f"/questions/{qid}/refine", json={}).status_code == 401

    def test_refine_unresolved(self):
        client = make_client(script=always_unfair_script())
        qid = create_rosetta(client)
        body = client.post(
            f"/questions/{qid}/refine", json={"max_rounds": 3}, headers=AUTH
        ).json()
        assert body["outcome"] == "Unresolved"
        assert len(body["rounds"]) == 3

    def test_generate_criteria_does_not_persist(self):
        script = gateway.ScriptTable.of(
            ("numbered list", "1. Mentions the decree\n2. Mentions the scripts")
        )
        client = make_client(script=script)
        resp = client.post(
            "/questions",
            json={"text": "What is the Rosetta Stone?", "feedback_mode": "holistic"},
            headers=AUTH,
        )
        qid = resp.json()["question_id"]
        body = client.post(
            f"/questions/{qid}/criteria:generate", headers=AUTH
        ).json()
        assert body["criteria"] == ["Mentions the decree", "Mentions the scripts"]
        # instructor must review then PUT; nothing stored yet
        resp = client.post(f"/questions/{qid}/criteria:generate", headers=AUTH)
        assert resp.status_code == 200


class TestAssignments:
    def test_create_and_fetch_in_order(self):
        client = make_client()
        q1 = create_rosetta(client)
        resp = client.post(
            "/questions",
            json={"text": "Explain DNA base pairing.", "feedback_mode": "holistic"},
            headers=AUTH,
        )
        q2 = resp.json()["question_id"]
        resp = client.post(
            "/assignments",
            json={"title": "Week 1", "question_ids": [q2, q1]},
            headers=AUTH,
        )
        assert resp.status_code == 201
        aid = resp.json()["assignment_id"]
        body = client.get(f"/assignments/{aid}").json()
        assert [q["id"] for q in body["questions"]] == [q2, q1]
        assert ROSETTA_CRITERION not in str(body)

    def test_unknown_member_404(self):
        client = make_client()
        resp = client.post(
            "/assignments",
            json={"title": "W", "question_ids": [domain.new_id()]},
            headers=AUTH,
        )
        assert resp.status_code == 404

    def test_requires_auth(self):
        client = make_client()
        assert client.post("/assignments", json={"title": "W"}).status_code == 401

    def test_unknown_assignment_404(self):
        client = make_client()
        assert client.get(f"/assignments/{domain.new_id()}").status_code == 404


class TestHealth:
    def test_health(self):
        client = make_client()
        body = client.get("/health").json()
        assert body == {"status": "ok", "driver": "memory", "provider_id": "scripted"}


class TestConfig:
    def test_empty_token_rejected(self):
        with pytest.raises(ValueError):
            ServiceConfig(api_token="")

    def test_cli_serve_help(self):
        from click.testing import CliRunner

        from freetext.cli import main

        result = CliRunner().invoke(main, ["serve", "--help"])
        assert result.exit_code == 0
        for flag in ["--port", "--api-token", "--storage-driver", "--max-rounds",
                     "--persist-responses", "--template-dir"]:
            assert flag in result.output

    def test_cli_env_var_token(self, monkeypatch):
        # flags win over env, env supplies defaults
        from click.testing import CliRunner

        from freetext.cli import main

        monkeypatch.setenv("FREETEXT_API_TOKEN", "tok")
        monkeypatch.setenv("FREETEXT_PORT", "9123")
        captured = {}
        monkeypatch.setattr(
            "uvicorn.run", lambda app, **kw: captured.update(kw)
        )
        result = CliRunner().invoke(main, ["serve"])
        assert result.exit_code == 0, result.output
        assert captured["port"] == 9123
        # flags win over env
        result = CliRunner().invoke(main, ["serve", "--port", "9999"])
        assert result.exit_code == 0
        assert captured["port"] == 9999
