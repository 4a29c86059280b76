"""Versioned HTTP API for the adjudication service.

Routes (all JSON, UTF-8):
    GET  /v1/sessions
    GET  /v1/sessions/{session_id}
    GET  /v1/sessions/{session_id}/next
    POST /v1/sessions/{session_id}/resolutions
    GET  /v1/sessions/{session_id}/export
    GET  /v1/sessions/{session_id}/modifications
    GET  /v1/contexts/{context_id}
    GET  /v1/reports/{runset_id}

Errors are status codes plus {"error": {"code", "message"}} objects. A
shared token header (X-Api-Token) is the only authentication.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import adjudication
from .adjudication import AdjudicationSession
from .errors import CiteContextError, InvalidLabel, NotFound, UnknownContext, UnknownSession
from .jats import CitationContext
from .schemas import AnnotationSchema
from .store import ResultStore


class ResolutionRequest(BaseModel):
    context_id: str
    label: str
    resolver: str
    note: str = ""


@dataclass
class AdjudicationService:
    store: ResultStore
    schemas: dict[str, AnnotationSchema]
    sessions: dict[str, AdjudicationSession] = field(default_factory=dict)
    contexts: dict[str, CitationContext] = field(default_factory=dict)

    def session(self, session_id: str) -> AdjudicationSession:
        if session_id not in self.sessions:
            raise UnknownSession(f"unknown session: {session_id!r}")
        return self.sessions[session_id]

    def add_session(self, session: AdjudicationSession) -> None:
        adjudication.load_resolutions(session, self.store)
        self.sessions[session.session_id] = session

    def flush(self) -> None:
        """Persist session metadata; resolutions are already on disk."""
        for session in self.sessions.values():
            self.store.write_json(
                f"sessions/{session.session_id}/session.json",
                {
                    "session_id": session.session_id,
                    "schema_id": session.schema_id,
                    "queue": [item.context_id for item in session.queue],
                    "resolved": session.resolved_count,
                },
            )


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _session_summary(session: AdjudicationSession) -> dict:
    return {
        "session_id": session.session_id,
        "schema_id": session.schema_id,
        "total": len(session.queue),
        "resolved": session.resolved_count,
    }


def create_app(
    service: AdjudicationService,
    token: str | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        service.flush()  # persist session metadata on shutdown

    app = FastAPI(title="citecontext adjudication API", lifespan=lifespan)

    @app.exception_handler(HTTPException)
    async def handle_http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    def check_token(x_api_token: str | None) -> None:
        if token is not None and x_api_token != token:
            raise _error(401, "unauthorized", "missing or wrong X-Api-Token header")

    def get_session(session_id: str) -> AdjudicationSession:
        try:
            return service.session(session_id)
        except UnknownSession as exc:
            raise _error(404, "unknown_session", str(exc))

    @app.get("/v1/sessions")
    def list_sessions(x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        return {
            "sessions": [
                _session_summary(s)
                for _, s in sorted(service.sessions.items())
            ]
        }

    @app.get("/v1/sessions/{session_id}")
    def session_detail(session_id: str, x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        session = get_session(session_id)
        schema = service.schemas[session.schema_id]
        return {
            **_session_summary(session),
            "classes": [
                {"name": c.name, "code": c.code, "definition": c.definition}
                for c in schema.classes
            ],
            "queue": [item.to_dict() for item in session.queue],
            "resolutions": [r.to_dict() for r in session.resolution_log],
        }

    @app.get("/v1/sessions/{session_id}/next")
    def next_item(session_id: str, x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        session = get_session(session_id)
        item = session.next_item()
        if item is None:
            return {"done": True, "item": None}
        return {"done": False, "item": item.to_dict()}

    @app.post("/v1/sessions/{session_id}/resolutions")
    def post_resolution(
        session_id: str,
        body: ResolutionRequest,
        x_api_token: str | None = Header(default=None),
    ):
        check_token(x_api_token)
        session = get_session(session_id)
        schema = service.schemas[session.schema_id]
        try:
            resolution = adjudication.resolve(
                session,
                schema,
                context_id=body.context_id,
                label=body.label,
                resolver=body.resolver,
                note=body.note,
                store=service.store,
            )
        except UnknownContext as exc:
            raise _error(404, "unknown_context", str(exc))
        except InvalidLabel as exc:
            raise _error(422, "invalid_label", str(exc))
        return {"resolution": resolution.to_dict()}

    @app.get("/v1/sessions/{session_id}/export")
    def export(session_id: str, x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        session = get_session(session_id)
        vector = adjudication.export_resolved(session)
        return {
            "schema_id": vector.schema_id,
            "entries": [
                {"context_id": cid, "label": label} for cid, label in vector.entries
            ],
        }

    @app.get("/v1/sessions/{session_id}/modifications")
    def modifications(session_id: str, x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        session = get_session(session_id)
        return {"modification_counts": adjudication.modification_counts(session)}

    @app.get("/v1/contexts/{context_id}")
    def get_context(context_id: str, x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        if context_id not in service.contexts:
            raise _error(404, "unknown_context", f"unknown context: {context_id!r}")
        return service.contexts[context_id].to_dict()

    @app.get("/v1/reports/{runset_id}")
    def get_report(runset_id: str, x_api_token: str | None = Header(default=None)):
        check_token(x_api_token)
        try:
            return service.store.read_json(f"runsets/{runset_id}/report.json")
        except NotFound as exc:
            raise _error(404, "not_found", str(exc))
        except CiteContextError as exc:
            raise _error(500, "store_error", str(exc))

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
