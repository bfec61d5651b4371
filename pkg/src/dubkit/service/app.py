"""HTTP/JSON surface of the contribution service (paths versioned at /v1).

Stateless handlers over a shared :class:`Store`; every error leaves the
wire as ``{"code", "message", "details"}`` with a meaningful status.
"""

from __future__ import annotations

from typing import Optional

from fastapi import Depends, FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from dubkit.config import ProviderSet
from dubkit.service.auth import Forbidden, TokenAuth
from dubkit.service.crawler import crawler_pass
from dubkit.service.store import Contribution, SentenceRecord, ServiceError, Store


class ContributionIn(BaseModel):
    sentence_id: str
    proposed_text: str


def _sentence_payload(s: SentenceRecord) -> dict:
    return {
        "sentence_id": s.sentence_id,
        "video_id": s.video_id,
        "index": s.index,
        "original_text": s.original_text,
        "current_translation": s.current_translation,
        "current_f1": s.current_f1,
        "flagged": s.flagged,
        "version": s.version,
    }


def _contribution_payload(c: Contribution) -> dict:
    return {
        "contribution_id": c.contribution_id,
        "sentence_id": c.sentence_id,
        "user_id": c.user_id,
        "proposed_text": c.proposed_text,
        "submitted_at": c.submitted_at,
        "round_trip_f1": c.round_trip_f1,
        "state": c.state,
    }


def create_app(
    store: Store,
    auth: TokenAuth,
    providers: ProviderSet | None = None,
) -> FastAPI:
    """Wire the API over a store; ``providers`` powers the admin crawler
    endpoint and may be omitted for read-only deployments."""
    app = FastAPI(title="dubkit contribution service", docs_url=None, redoc_url=None)

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={
                "code": type(exc).__name__,
                "message": str(exc),
                "details": exc.details,
            },
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "code": "ValidationError",
                "message": "request body failed validation",
                "details": {"errors": exc.errors()},
            },
        )

    def current_user(authorization: Optional[str] = Header(default=None)) -> str:
        return auth.authenticate(authorization)

    def admin_user(authorization: Optional[str] = Header(default=None)) -> str:
        return auth.require_admin(authorization)

    @app.get("/v1/videos")
    def list_videos():
        return {"videos": store.list_videos()}

    @app.get("/v1/videos/{video_id}/sentences")
    def list_sentences(video_id: str):
        sentences = store.list_sentences(video_id)
        return {"video_id": video_id, "sentences": [_sentence_payload(s) for s in sentences]}

    @app.get("/v1/videos/{video_id}/artifact")
    def video_artifact(video_id: str):
        video = store.get_video(video_id)
        return {
            "video_id": video.video_id,
            "artifact_path": video.artifact_path,
            "artifact_version": video.artifact_version,
        }

    @app.post("/v1/contributions", status_code=201)
    def submit_contribution(body: ContributionIn, user_id: str = Depends(current_user)):
        contribution = store.submit_contribution(body.sentence_id, user_id, body.proposed_text)
        return _contribution_payload(contribution)

    @app.get("/v1/contributions")
    def list_contributions(user: str, user_id: str = Depends(current_user)):
        # Contributions and their review states are visible to their author.
        if user != user_id:
            raise Forbidden("contributions are listed per authenticated user")
        rows = store.contributions_for_user(user)
        return {"user": user, "contributions": [_contribution_payload(c) for c in rows]}

    @app.post("/v1/admin/crawler-pass")
    def run_crawler_pass(user_id: str = Depends(admin_user)):
        if providers is None:
            return JSONResponse(
                status_code=503,
                content={
                    "code": "CrawlerUnavailable",
                    "message": "service started without providers",
                    "details": {},
                },
            )
        report = crawler_pass(store, providers)
        return report.to_dict()

    return app
