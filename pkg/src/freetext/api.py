"""HTTP JSON surface: question authoring, student views, feedback, and the
refinement endpoints.

Instructor routes require a static bearer token compared in constant time;
the token never appears in logs or error bodies. Error bodies are
``{"error": <StableName>, "detail": <string>}`` and the stable names are
part of the contract.
"""

from __future__ import annotations

import hmac
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import domain, errors, gateway, prompts, refinement, storage

_ERROR_STATUS = {
    errors.ValidationError: 422,
    errors.NotFound: 404,
    errors.VersionConflict: 409,
    errors.DuplicateId: 409,
    errors.ProviderTimeout: 503,
    errors.ProviderUnavailable: 503,
    errors.OutputTooLong: 502,
    errors.UnparseableCompletion: 502,
    errors.CriteriaAlreadyPresent: 409,
    errors.PersistenceDisabled: 500,
}


def _status_for(exc: errors.FreetextError) -> int:
    for klass, status in _ERROR_STATUS.items():
        if isinstance(exc, klass):
            return status
    return 500


def _error_body(name: str, detail: str) -> dict:
    return {"error": name, "detail": detail}


@dataclass
class ServiceConfig:
    port: int = 8000
    api_token: str = ""
    storage_driver: str = "memory"
    storage_path: Optional[str] = None
    provider: str = "http"
    provider_endpoint: str = ""
    provider_key: str = ""
    provider_model: str = ""
    template_dir: Optional[str] = None
    webapp_dir: Optional[str] = None
    persist_responses: bool = False
    response_char_cap: int = domain.DEFAULT_RESPONSE_CHAR_CAP
    max_rounds: int = refinement.DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        if not self.api_token:
            raise ValueError("api_token must be set; instructor routes require it")


def _build_provider(config: ServiceConfig) -> gateway.LLMProvider:
    if config.provider == "http":
        return gateway.HttpChatProvider(
            endpoint=config.provider_endpoint,
            model=config.provider_model,
            api_key=config.provider_key,
        )
    if config.provider == "scripted":
        # empty script: every call is a ScriptMiss; useful for wiring checks
        return gateway.make_scripted_provider(gateway.ScriptTable.of())
    raise ValueError(f"unknown provider {config.provider!r}")


def create_app(
    config: ServiceConfig,
    store: Optional[storage.QuestionStore] = None,
    provider: Optional[gateway.LLMProvider] = None,
) -> FastAPI:
    store = store or storage.open_store(
        config.storage_driver, config.storage_path, config.persist_responses
    )
    provider = provider or _build_provider(config)
    library = prompts.TemplateLibrary(config.template_dir)
    app = FastAPI(title="freetext", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.provider = provider

    @app.exception_handler(errors.FreetextError)
    async def _freetext_error(request: Request, exc: errors.FreetextError):
        return JSONResponse(
            status_code=_status_for(exc),
            content=_error_body(exc.name, exc.detail),
        )

    def _authorized(request: Request) -> bool:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return False
        supplied = header[7:].strip()
        return hmac.compare_digest(
            supplied.encode("utf-8"), config.api_token.encode("utf-8")
        )

    def _require_auth(request: Request) -> Optional[JSONResponse]:
        if not _authorized(request):
            return JSONResponse(
                status_code=401,
                content=_error_body("Unauthorized", "missing or invalid bearer token"),
            )
        return None

    async def _json_body(request: Request) -> dict | JSONResponse:
        ctype = request.headers.get("content-type", "")
        if "application/json" not in ctype:
            return JSONResponse(
                status_code=415,
                content=_error_body(
                    "UnsupportedMediaType", "content-type must be application/json"
                ),
            )
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(
                status_code=400,
                content=_error_body("MalformedJson", "request body is not valid JSON"),
            )
        if not isinstance(body, dict):
            return JSONResponse(
                status_code=400,
                content=_error_body("MalformedJson", "request body must be an object"),
            )
        return body

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "driver": store.driver_id,
            "provider_id": provider.identity,
        }

    @app.post("/questions", status_code=201)
    async def create_question(request: Request):
        if denied := _require_auth(request):
            return denied
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        q = domain.validate_question(
            text=body.get("text", ""),
            criteria=body.get("criteria", []),
            feedback_mode=body.get("feedback_mode", "holistic"),
            assignment_id=body.get("assignment_id"),
        )
        store.put_question(q)
        return JSONResponse(status_code=201, content={"question_id": q.id})

    @app.get("/questions/{question_id}")
    async def get_question(question_id: str):
        q = store.get_question(question_id)
        return domain.student_view(q).to_dict()

    @app.post("/questions/{question_id}/responses")
    async def submit_response(question_id: str, request: Request):
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        q = store.get_question(question_id)
        r = domain.validate_response(
            question_id=q.id,
            text=body.get("response_text", ""),
            char_cap=config.response_char_cap,
        )
        payload = prompts.build_feedback_prompt(q, r, library)
        completion = gateway.complete(provider, payload)
        feedback = gateway.parse_feedback(completion, q.feedback_mode, r.text)
        if config.persist_responses:
            store.record_response(
                storage.ResponseRecord(
                    question_id=q.id,
                    response_text=r.text,
                    feedback_holistic_copy=feedback.holistic,
                )
            )
        return feedback.to_dict()

    @app.post("/questions/{question_id}/refine")
    async def refine(question_id: str, request: Request):
        if denied := _require_auth(request):
            return denied
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        q = store.get_question(question_id)
        max_rounds = int(body.get("max_rounds") or config.max_rounds)
        report = refinement.refine_question(
            q, provider, max_rounds=max_rounds, library=library
        )
        return report.to_dict()

    @app.put("/questions/{question_id}")
    async def update_question(question_id: str, request: Request):
        if denied := _require_auth(request):
            return denied
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        if "expected_version" not in body:
            raise errors.ValidationError("expected_version is required")
        current = store.get_question(question_id)
        expected = int(body["expected_version"])
        updated = current
        if "text" in body and body["text"] is not None:
            # reuse draft validation for the caps, keep identity fields
            checked = domain.validate_question(
                body["text"], [], current.feedback_mode
            )
            updated = updated.with_text(checked.text)
        if "criteria" in body and body["criteria"] is not None:
            criteria = body["criteria"]
            if len(criteria) > domain.MAX_CRITERIA:
                raise errors.TooManyCriteria(
                    f"at most {domain.MAX_CRITERIA} criteria allowed"
                )
            updated = replace(
                updated,
                criteria=tuple(domain.validate_criterion(c) for c in criteria),
            )
        updated = replace(updated, version=expected + 1)
        store.update_question(updated, expected_version=expected)
        return {"question_id": updated.id, "version": updated.version}

    @app.post("/questions/{question_id}/criteria:generate")
    async def generate_criteria(question_id: str, request: Request):
        if denied := _require_auth(request):
            return denied
        q = store.get_question(question_id)
        criteria = refinement.generate_criteria(q, provider, library=library)
        return {"criteria": [c.text for c in criteria]}

    @app.post("/assignments", status_code=201)
    async def create_assignment(request: Request):
        if denied := _require_auth(request):
            return denied
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        a = domain.validate_assignment(
            title=body.get("title", ""), question_ids=body.get("question_ids", [])
        )
        for qid in a.question_ids:
            store.get_question(qid)  # 404 on any unknown member
        store.put_assignment(a)
        return JSONResponse(status_code=201, content={"assignment_id": a.id})

    @app.get("/assignments/{assignment_id}")
    async def get_assignment(assignment_id: str):
        a = store.get_assignment(assignment_id)
        questions = store.list_questions(assignment_id)
        return {
            "id": a.id,
            "title": a.title,
            "questions": [domain.student_view(q).to_dict() for q in questions],
        }

    webapp_dir = config.webapp_dir and Path(config.webapp_dir)
    if webapp_dir and webapp_dir.is_dir():
        app.mount("/app", StaticFiles(directory=webapp_dir, html=True), name="app")

    return app
