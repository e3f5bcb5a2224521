"""HTTP + server-sent-events API over the session store.

Endpoints (all JSON, UTF-8):
    POST /sessions                              multipart: log file + repo path or zip archive
    GET  /sessions/{sid}                        session status
    GET  /sessions/{sid}/events                 SSE stream: card*, then complete | error
    GET  /sessions/{sid}/level1                 the full Level 1 document
    POST /sessions/{sid}/changes/{i}/level2     lazy, cached Level 2 document
    GET  /sessions/{sid}/artifacts/{aid}        ?start&end -> exact line slice
    GET  /healthz
"""
from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from agentlens.backends import BackendConfig
from agentlens.errors import (
    ApplyError,
    BudgetError,
    GenerationError,
    LensError,
    NotFoundError,
    ParseError,
    RangeError,
    SecurityError,
    ValidationError,
)
from agentlens.schemas import canonical_json
from agentlens.store import SessionStore

_STATUS_BY_ERROR = (
    (NotFoundError, 404),
    (RangeError, 400),
    (SecurityError, 400),
    (ParseError, 400),
    (ValidationError, 400),
    (ApplyError, 400),
    (BudgetError, 400),
    (GenerationError, 500),
)


@dataclass
class ServiceConfig:
    port: int = 8400
    store_dir: str = ".lens-store"
    backend: BackendConfig = field(default_factory=BackendConfig)
    panel_dir: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ServiceConfig":
        backend = BackendConfig.from_dict(doc.get("backend", {}))
        return cls(
            port=int(doc.get("port", cls.port)),
            store_dir=str(doc.get("store_dir", cls.store_dir)),
            backend=backend,
            panel_dir=doc.get("panel_dir"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _error_status(exc: LensError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return status
    return 500


def _sse_frame(event: dict) -> str:
    data = canonical_json(event["data"]).decode("utf-8")
    return f"event: {event['event']}\ndata: {data}\n\n"


def create_app(config: ServiceConfig | None = None, store: SessionStore | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = store or SessionStore(config.store_dir, config.backend)
    app = FastAPI(title="agentlens", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store
    app.state.config = config

    @app.exception_handler(LensError)
    async def lens_error_handler(_request: Request, exc: LensError):
        return JSONResponse(status_code=_error_status(exc), content={"error": exc.to_dict()})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(
        log: UploadFile = File(...),
        repo_path: str | None = Form(default=None),
        repo_archive: UploadFile | None = File(default=None),
    ) -> dict:
        log_bytes = await log.read()
        if repo_path is None and repo_archive is None:
            raise ValidationError("provide either repo_path or repo_archive")
        if repo_path is not None:
            root = Path(repo_path)
        else:
            assert repo_archive is not None
            payload = await repo_archive.read()
            # Peek at the log for the session id so the extracted tree
            # lands in a per-session location.
            from agentlens.session import parse_session_log

            session_id = parse_session_log(log_bytes).session_id
            root = store.store_dir / session_id / "repo"
            root.mkdir(parents=True, exist_ok=True)
            try:
                with zipfile.ZipFile(io.BytesIO(payload)) as archive:
                    for member in archive.namelist():
                        target = (root / member).resolve()
                        if not str(target).startswith(str(root.resolve())):
                            raise SecurityError(f"archive member escapes the root: {member!r}")
                    archive.extractall(root)
            except zipfile.BadZipFile as exc:
                raise ValidationError(f"repo_archive is not a valid zip: {exc}") from exc
        session_id = store.create_session(log_bytes, root)
        return {"session_id": session_id, "status": "ingesting"}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str) -> dict:
        return store.session_info(session_id)

    @app.get("/sessions/{session_id}/events")
    def session_events(session_id: str) -> StreamingResponse:
        store._state(session_id)  # fail fast with 404 before streaming starts

        def event_stream():
            for event in store.stream_events(session_id):
                yield _sse_frame(event)

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/level1")
    def level1(session_id: str) -> Response:
        return Response(content=store.level1_bytes(session_id), media_type="application/json")

    @app.post("/sessions/{session_id}/changes/{order_index}/level2")
    def level2(session_id: str, order_index: int) -> Response:
        data = store.level2_bytes(session_id, order_index)
        return Response(content=data, media_type="application/json")

    @app.get("/sessions/{session_id}/artifacts/{artifact_id}")
    def artifact_slice(session_id: str, artifact_id: str, start: int, end: int) -> dict:
        return store.artifact_slice(session_id, artifact_id, start, end)

    if config.panel_dir and Path(config.panel_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/panel", StaticFiles(directory=config.panel_dir, html=True), name="panel")

    return app
