"""HTTP API over the store, renderer, and analytics.

Endpoints (all JSON unless noted):

    POST /v1/performances                create (metadata + events CSV or rows)
    GET  /v1/performances                newest-first metadata page
    GET  /v1/performances/{id}           metadata + events
    GET  /v1/performances/{id}/audio.wav rendered audio of the whole chain
    GET  /v1/performances/{id}/trace.png layered trace image
    POST /v1/performances/{id}/reply     create a reply layer
    GET  /v1/performances/{id}/chain     ordered layer metadata, root first
    GET  /v1/report                      corpus report over the whole store

Every non-2xx response body is ``{"status", "code", "detail"}`` plus a
``violations`` list for validation failures. Audio and trace artifacts are
rendered lazily on first request and cached in the record directory under
engine-versioned names; duplicate in-flight renders for one id coalesce.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, model_validator

from . import analytics, synth, trace
from .audio import DEFAULT_SAMPLE_RATE, to_wav_bytes
from .model import (
    ChainError,
    CsvHeaderError,
    CsvParseError,
    InvalidPerformanceError,
    TinyPerformance,
    TouchEvent,
    isoformat_utc,
    parse_events_csv,
    parse_iso_utc,
)
from .store import JamStore, NotFoundError, ParentNotFoundError

__all__ = ["create_app", "ApiError"]

DEFAULT_PAGE_SIZE = 20
MAX_PAGE_SIZE = 100
TRACE_SIZE = 300


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str, violations: list | None = None):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail
        self.violations = violations


class EventIn(BaseModel):
    time: float
    x: float
    y: float
    z: float
    moving: int


class PerformanceIn(BaseModel):
    performer: str = ""
    instrument: str
    date: str | None = None
    parent_id: str | None = None
    events_csv: str | None = None
    events: list[EventIn] | None = None

    @model_validator(mode="after")
    def _one_event_source(self) -> "PerformanceIn":
        if (self.events_csv is None) == (self.events is None):
            raise ValueError("provide exactly one of events_csv or events")
        return self


def _build_performance(body: PerformanceIn, parent_id: str | None) -> TinyPerformance:
    if body.events_csv is not None:
        try:
            events = parse_events_csv(body.events_csv)
        except (CsvHeaderError, CsvParseError) as exc:
            raise ApiError(422, "malformed-events-csv", str(exc)) from exc
    else:
        events = tuple(
            TouchEvent(e.time, e.x, e.y, e.z, e.moving) for e in body.events or ()
        )
    if body.date is not None:
        try:
            date = parse_iso_utc(body.date)
        except ValueError as exc:
            raise ApiError(422, "malformed-date", str(exc)) from exc
    else:
        date = datetime.now(timezone.utc)
    return TinyPerformance(
        id="",
        performer=body.performer,
        instrument=body.instrument,
        date=date,
        parent_id=parent_id,
        events=events,
    )


def create_app(store_dir: str | Path) -> FastAPI:
    store = JamStore(store_dir)
    app = FastAPI(title="tinyjam", version="0.1.0")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    render_locks: dict[str, threading.Lock] = {}
    render_locks_guard = threading.Lock()

    def render_lock(key: str) -> threading.Lock:
        with render_locks_guard:
            return render_locks.setdefault(key, threading.Lock())

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError) -> JSONResponse:
        body: dict = {"status": exc.status, "code": exc.code, "detail": exc.detail}
        if exc.violations is not None:
            body["violations"] = exc.violations
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(RequestValidationError)
    async def handle_malformed(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"status": 422, "code": "malformed-body", "detail": str(exc.errors())},
        )

    def store_put(perf: TinyPerformance) -> str:
        try:
            return store.put(perf)
        except InvalidPerformanceError as exc:
            raise ApiError(
                400,
                "validation-failed",
                "performance failed validation",
                violations=[
                    {"code": v.code, "message": v.message, "index": v.index}
                    for v in exc.violations
                ],
            ) from exc
        except ParentNotFoundError as exc:
            raise ApiError(404, "parent-not-found", str(exc)) from exc

    def fetch(perf_id: str) -> TinyPerformance:
        try:
            return store.get(perf_id)
        except NotFoundError:
            raise ApiError(404, "not-found", f"no performance {perf_id!r}") from None

    @app.post("/v1/performances", status_code=201)
    def create_performance(body: PerformanceIn) -> dict:
        perf = _build_performance(body, body.parent_id)
        new_id = store_put(perf)
        return {"id": new_id, "created_at": store.get_record(new_id).created_at}

    @app.post("/v1/performances/{perf_id}/reply", status_code=201)
    def create_reply(perf_id: str, body: PerformanceIn) -> dict:
        if perf_id not in store:
            raise ApiError(404, "not-found", f"no performance {perf_id!r}")
        perf = _build_performance(body, parent_id=perf_id)
        new_id = store_put(perf)
        return {"id": new_id, "created_at": store.get_record(new_id).created_at}

    @app.get("/v1/performances")
    def list_performances(page: int = 1, page_size: int = DEFAULT_PAGE_SIZE) -> dict:
        if page < 1:
            raise ApiError(422, "malformed-query", "page must be >= 1")
        page_size = max(1, min(page_size, MAX_PAGE_SIZE))
        records, total = store.list_page(page, page_size)
        return {
            "page": page,
            "page_size": page_size,
            "total": total,
            "items": [r.to_dict() for r in records],
        }

    @app.get("/v1/performances/{perf_id}")
    def get_performance(perf_id: str) -> dict:
        perf = fetch(perf_id)
        record = store.get_record(perf_id)
        return {
            "id": perf.id,
            "performer": perf.performer,
            "instrument": perf.instrument,
            "date": isoformat_utc(perf.date),
            "parent_id": perf.parent_id,
            "created_at": record.created_at,
            "events": [
                {"time": e.time, "x": e.x, "y": e.y, "z": e.z, "moving": e.moving}
                for e in perf.events
            ],
        }

    @app.get("/v1/performances/{perf_id}/chain")
    def get_chain(perf_id: str) -> dict:
        fetch(perf_id)
        try:
            layered = store.chain(perf_id)
        except ChainError as exc:
            raise ApiError(409, "broken-chain", str(exc)) from exc
        return {
            "layers": [store.get_record(layer.id).to_dict() for layer in layered.layers]
        }

    @app.get("/v1/performances/{perf_id}/audio.wav")
    def get_audio(perf_id: str) -> Response:
        fetch(perf_id)
        cache_name = f"audio_{DEFAULT_SAMPLE_RATE}_v{synth.ENGINE_VERSION}.wav"
        with render_lock(f"audio:{perf_id}"):
            data = store.read_cache(perf_id, cache_name)
            if data is None:
                try:
                    layered = store.chain(perf_id)
                except ChainError as exc:
                    raise ApiError(409, "broken-chain", str(exc)) from exc
                data = to_wav_bytes(synth.render_layers(layered, DEFAULT_SAMPLE_RATE))
                store.write_cache(perf_id, cache_name, data)
        return Response(content=data, media_type="audio/wav")

    @app.get("/v1/performances/{perf_id}/trace.png")
    def get_trace(perf_id: str) -> Response:
        fetch(perf_id)
        cache_name = f"trace_{TRACE_SIZE}_v{trace.TRACE_VERSION}.png"
        with render_lock(f"trace:{perf_id}"):
            data = store.read_cache(perf_id, cache_name)
            if data is None:
                try:
                    layered = store.chain(perf_id)
                except ChainError as exc:
                    raise ApiError(409, "broken-chain", str(exc)) from exc
                data = trace.to_png_bytes(trace.render_layered(layered, TRACE_SIZE))
                store.write_cache(perf_id, cache_name, data)
        return Response(content=data, media_type="image/png")

    @app.get("/v1/report")
    def get_report(kde_resolution: int = 100) -> dict:
        kde_resolution = max(10, min(kde_resolution, 200))
        report = analytics.build_report(store.all_performances(), kde_resolution=kde_resolution)
        return report.to_dict()

    return app
