"""HTTP JSON API over the engine, plus the static mount for the web console.

Endpoints:
    POST /api/ask            question -> gated answers with provenance
    GET  /api/reports        indexed documents
    GET  /api/questions      predefined questions (config verbatim)
    GET  /api/passages/{id}  passage with document metadata
    GET  /api/health         component statuses

Errors are JSON objects {"error": ..., "component": ...?} with 400 for bad
input, 404 for unknown ids, and 502 for backend outages.
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import BackendError, NotFoundError, ValidationError
from .service import AskRequest, Engine


class AskBody(BaseModel):
    question: str
    report_id: str | None = None
    top_k: int | None = None


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="reportqa", docs_url=None, redoc_url=None)

    @app.exception_handler(ValidationError)
    async def _bad_input(request: Request, exc: ValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(BackendError)
    async def _backend_down(request: Request, exc: BackendError):
        return JSONResponse(
            status_code=502,
            content={"error": str(exc), "component": exc.component},
        )

    @app.post("/api/ask")
    def ask(body: AskBody):
        response = engine.ask(
            AskRequest(
                question=body.question,
                report_id=body.report_id,
                top_k=body.top_k,
            )
        )
        return asdict(response)

    @app.get("/api/reports")
    def reports():
        return {"reports": engine.list_reports()}

    @app.get("/api/questions")
    def questions():
        return {"questions": engine.predefined_questions()}

    @app.get("/api/passages/{passage_id}")
    def passage(passage_id: str):
        return engine.passage_view(passage_id)

    @app.get("/api/health")
    def health():
        return engine.health()

    static_dir = engine.config.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
