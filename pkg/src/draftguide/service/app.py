"""HTTP surface for the moderation service.

Endpoints:
  PUT  /communities/{id}/ruleset   replace a community's rules
  POST /communities/{id}/evaluate  live draft evaluation
  POST /communities/{id}/submit    gated submission
  GET  /assignment/{user_id}       experiment arm lookup
  GET  /report?outcome=&covariate=&format=   effect report over the log
  GET  /healthz

When a frontend build directory is configured it is served at /app.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from pydantic import BaseModel, Field

from .. import rules as rules_mod
from .config import ServiceConfig
from .state import (
    NotIdentifiableError,
    PayloadTooLargeError,
    ServiceState,
    UnknownCommunityError,
)


class EvaluatePayload(BaseModel):
    user_id: str = Field(min_length=1)
    title: str = ""
    body: str = ""
    event: str = "OnEdit"


class SubmitPayload(BaseModel):
    user_id: str = Field(min_length=1)
    title: str = ""
    body: str = ""


def _trigger_event(raw: str) -> rules_mod.TriggerEvent:
    try:
        return rules_mod.TriggerEvent(raw)
    except ValueError:
        raise HTTPException(
            status_code=422, detail=f"event must be OnEdit or OnSubmit, got {raw!r}"
        )


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="draftguide service")
    app.state.service = state

    @app.exception_handler(UnknownCommunityError)
    async def _unknown_community(request: Request, exc: UnknownCommunityError):
        return _error(404, str(exc))

    @app.exception_handler(PayloadTooLargeError)
    async def _too_large(request: Request, exc: PayloadTooLargeError):
        return _error(413, str(exc))

    def _error(status: int, detail) -> Response:
        import json

        return Response(
            content=json.dumps({"detail": detail}),
            status_code=status,
            media_type="application/json",
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/assignment/{user_id}")
    def assignment(user_id: str):
        return {"user_id": user_id, "arm": state.arm_of(user_id).value}

    @app.put("/communities/{community_id}/ruleset")
    async def put_ruleset(community_id: str, request: Request):
        try:
            document = await request.json()
        except Exception:
            return _error(400, "request body must be a JSON ruleset document")
        try:
            version = state.put_ruleset(community_id, document)
        except rules_mod.RulesetValidationError as exc:
            return _error(
                422,
                {
                    "errors": [
                        {"rule_name": issue.rule_name, "reason": issue.reason}
                        for issue in exc.issues
                    ]
                },
            )
        return {"community_id": community_id, "version": version}

    @app.post("/communities/{community_id}/evaluate")
    def evaluate(community_id: str, payload: EvaluatePayload):
        outcome = state.evaluate(
            community_id,
            payload.user_id,
            payload.title,
            payload.body,
            _trigger_event(payload.event),
        )
        return {
            "arm": outcome.arm.value,
            "ruleset_version": outcome.ruleset_version,
            "guidance": outcome.guidance.to_dict(),
        }

    @app.post("/communities/{community_id}/submit")
    def submit(community_id: str, payload: SubmitPayload):
        outcome = state.submit(community_id, payload.user_id, payload.title, payload.body)
        return {
            "accepted": outcome.accepted,
            "post_id": outcome.post_id,
            "arm": outcome.arm.value,
            "ruleset_version": outcome.ruleset_version,
            "guidance": outcome.guidance.to_dict(),
        }

    @app.get("/report")
    def report(
        outcome: str | None = None,
        covariate: str | None = None,
        format: str = "text",
    ):
        if format not in ("text", "csv"):
            return _error(422, "format must be 'text' or 'csv'")
        try:
            rendered = state.report(outcome, covariate, fmt=format)
        except NotIdentifiableError as exc:
            return _error(409, str(exc))
        media = "text/csv" if format == "csv" else "text/plain"
        return Response(content=rendered, media_type=media)

    frontend = state.config.frontend_dir
    if frontend and Path(frontend).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=frontend, html=True), name="frontend")

    return app


def build_app(config: ServiceConfig, clock=None) -> FastAPI:
    return create_app(ServiceState(config, clock=clock))
