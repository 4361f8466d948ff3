"""Session-oriented HTTP service exposing the pipeline over JSON endpoints."""

from __future__ import annotations

import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .assets import manifest_json
from .config import ServiceConfig
from .errors import InvalidStroke, MalformedDocument, UnsupportedVersion
from .gateway import BackendEndpoint, Gateway
from .pipeline import (
    IllegalTransition,
    SessionRecord,
    SessionState,
    attach_sketch,
    begin_generation,
    begin_selection,
    run_generation,
    run_reconstruction,
)
from .sketch import parse_sketch

log = logging.getLogger(__name__)


class SessionStore:
    """In-memory session map with optional write-through persistence and TTL."""

    def __init__(self, persist_dir: str = "", ttl_s: float = 3600.0):
        self._sessions: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()
        self._persist_dir = Path(persist_dir) if persist_dir else None
        self._ttl_s = ttl_s

    def create(self) -> SessionRecord:
        self.evict_idle()
        session = SessionRecord()
        with self._lock:
            self._sessions[session.id] = session
        self.persist(session)
        return session

    def get(self, session_id: str) -> SessionRecord:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def evict_idle(self):
        if self._ttl_s <= 0:
            return
        horizon = time.time() - self._ttl_s
        with self._lock:
            stale = [sid for sid, s in self._sessions.items()
                     if s.updated_at < horizon and s.state not in
                     (SessionState.INFERRING_IMAGES, SessionState.RECONSTRUCTING)]
            for sid in stale:
                del self._sessions[sid]

    def persist(self, session: SessionRecord):
        """Write-through of session status and finished assets."""
        if self._persist_dir is None:
            return
        try:
            target = self._persist_dir / session.id
            target.mkdir(parents=True, exist_ok=True)
            with session.lock:
                status = session.status_dict()
                asset = session.asset
            (target / "session.json").write_text(
                json.dumps(status, sort_keys=True, indent=2) + "\n", encoding="utf-8")
            if asset is not None:
                (target / "mesh.obj").write_text(asset.obj_text, encoding="utf-8")
                (target / "material.mtl").write_text(asset.mtl_text, encoding="utf-8")
                (target / "manifest.json").write_bytes(manifest_json(asset.manifest))
        except OSError as exc:
            log.warning("session persistence failed for %s: %s", session.id, exc)


class GenerateBody(BaseModel):
    prompt: str
    seed: int | None = Field(default=None, ge=0)
    candidates: int | None = Field(default=None, ge=1, le=16)


class SelectBody(BaseModel):
    index: int


def _endpoint(kind: str, url: str, cfg: ServiceConfig) -> BackendEndpoint | None:
    if not url:
        return None
    return BackendEndpoint(kind=kind, url=url, timeout=cfg.backend_timeout_s,
                           retry_limit=cfg.retry_limit, token=cfg.shared_token)


def build_gateway(cfg: ServiceConfig) -> Gateway | None:
    image = _endpoint("image", cfg.image_backend, cfg)
    recon = _endpoint("reconstruct", cfg.recon_backend, cfg)
    if image is None or recon is None:
        return None
    matting = _endpoint("matting", cfg.matting_backend, cfg)
    return Gateway(image=image, recon=recon, matting=matting,
                   max_inflight=cfg.max_inflight)


def create_app(config: ServiceConfig | None = None,
               gateway: Gateway | None = None) -> FastAPI:
    """Build the service app; `gateway` overrides the config-derived backends."""
    config = config or ServiceConfig()
    app = FastAPI(title="meshforge", version="0.1.0")
    # local-network tool; the browser studio is served from a separate origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store = SessionStore(persist_dir=config.persist_dir, ttl_s=config.session_ttl_s)
    if gateway is None:
        gateway = build_gateway(config)
    executor = ThreadPoolExecutor(max_workers=max(2 * config.max_inflight, 4),
                                  thread_name_prefix="meshforge")
    app.state.store = store
    app.state.gateway = gateway
    app.state.config = config
    app.state.executor = executor

    def check_token(request: Request):
        if config.shared_token:
            if request.headers.get("X-Meshforge-Token") != config.shared_token:
                raise HTTPException(status_code=401, detail="missing or wrong token")

    auth = [Depends(check_token)]

    def require_gateway() -> Gateway:
        if gateway is None:
            raise HTTPException(status_code=503, detail="no backend configured")
        return gateway

    def submit(work, session: SessionRecord):
        def run():
            try:
                work()
            finally:
                store.persist(session)
        executor.submit(run)

    @app.exception_handler(IllegalTransition)
    async def illegal_transition_handler(request: Request, exc: IllegalTransition):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.post("/v1/sessions", dependencies=auth)
    def create_session():
        session = store.create()
        return {"session_id": session.id}

    @app.put("/v1/sessions/{session_id}/sketch", status_code=204, dependencies=auth)
    async def put_sketch(session_id: str, request: Request):
        session = store.get(session_id)
        body = await request.body()
        try:
            canvas = parse_sketch(body)
        except (MalformedDocument, UnsupportedVersion, InvalidStroke) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        attach_sketch(session, canvas)  # IllegalTransition -> 409
        store.persist(session)
        return Response(status_code=204)

    @app.post("/v1/sessions/{session_id}/generate", status_code=202, dependencies=auth)
    def generate(session_id: str, body: GenerateBody):
        session = store.get(session_id)
        gw = require_gateway()
        begin_generation(session, body.prompt, body.seed, body.candidates)
        cfg = app.state.config.generation
        submit(lambda: run_generation(session, gw, cfg), session)
        return {"session_id": session.id, "state": session.state.value}

    @app.get("/v1/sessions/{session_id}", dependencies=auth)
    def session_status(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return session.status_dict()

    @app.get("/v1/sessions/{session_id}/candidates/{index}", dependencies=auth)
    def candidate_png(session_id: str, index: int):
        session = store.get(session_id)
        with session.lock:
            if not (0 <= index < len(session.candidate_pngs)):
                raise HTTPException(status_code=404,
                                    detail=f"no candidate {index} "
                                           f"(have {len(session.candidate_pngs)})")
            data = session.candidate_pngs[index]
        return Response(content=data, media_type="image/png")

    @app.post("/v1/sessions/{session_id}/select", status_code=202, dependencies=auth)
    def select(session_id: str, body: SelectBody):
        session = store.get(session_id)
        gw = require_gateway()
        try:
            begin_selection(session, body.index)
        except IndexError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        cfg = app.state.config.generation
        submit(lambda: run_reconstruction(session, gw, cfg), session)
        return {"session_id": session.id, "state": session.state.value}

    def _asset(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if session.asset is None:
                raise HTTPException(status_code=404,
                                    detail=f"session {session_id} has no asset "
                                           f"(state {session.state.value})")
            return session.asset

    @app.get("/v1/sessions/{session_id}/asset/manifest", dependencies=auth)
    def asset_manifest(session_id: str):
        return json.loads(manifest_json(_asset(session_id).manifest))

    @app.get("/v1/sessions/{session_id}/asset/mesh.obj", dependencies=auth)
    def asset_obj(session_id: str):
        return PlainTextResponse(_asset(session_id).obj_text)

    @app.get("/v1/sessions/{session_id}/asset/material.mtl", dependencies=auth)
    def asset_mtl(session_id: str):
        return PlainTextResponse(_asset(session_id).mtl_text)

    return app
