"""HTTP service: queries, sessions, and case detail for the web UI.

A thin adapter over the engine: every endpoint's card order is exactly the
corresponding engine call's ranking. Sessions live in memory with TTL
eviction; per-session mutations are serialized behind a lock. All schemas
sit under /api/v1 and the built web UI is served from /app when a bundle
directory is configured.
"""

from __future__ import annotations

import email.parser
import email.policy
import json
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .embeddings import EmbeddingGateway
from .errors import (
    ArchSeekError,
    AugmentationError,
    ConfigurationError,
    InputError,
    StateError,
    TransportError,
)
from .index import CaseDatabase
from .ingest import sniff_media_type
from .model import CRITIQUE_ASPECTS, Aspect, CaseId, DesignCase
from .retrieval import (
    AspectWeights,
    ImageQueryCache,
    RankedResult,
    SearchOptions,
    image_query,
    rerank_with_weights,
)
from .sessions import ImageOrigin, Session, TextOrigin, like, start_session, unlike

DEFAULT_MAX_IMAGE_BYTES = 8 * 1024 * 1024


class TextQueryBody(BaseModel):
    query: str


class WeightsBody(BaseModel):
    weights: dict[str, float]


class LikeBody(BaseModel):
    case_id: int


class BrowseBody(BaseModel):
    seed: int | None = None


@dataclass
class _SessionSlot:
    session: Session
    cache: ImageQueryCache | None
    touched: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory sessions with TTL eviction; one mutation at a time each."""

    def __init__(self, ttl_seconds: float, clock: Callable[[], float] = time.monotonic) -> None:
        self._ttl = ttl_seconds
        self._clock = clock
        self._slots: dict[str, _SessionSlot] = {}
        self._lock = threading.Lock()

    def _evict(self) -> None:
        now = self._clock()
        dead = [sid for sid, slot in self._slots.items() if now - slot.touched > self._ttl]
        for sid in dead:
            del self._slots[sid]

    def put(self, session: Session, cache: ImageQueryCache | None = None) -> None:
        with self._lock:
            self._evict()
            self._slots[session.session_id] = _SessionSlot(
                session=session, cache=cache, touched=self._clock()
            )

    def get(self, session_id: str) -> _SessionSlot | None:
        with self._lock:
            self._evict()
            slot = self._slots.get(session_id)
            if slot is not None:
                slot.touched = self._clock()
            return slot

    def __len__(self) -> int:
        with self._lock:
            self._evict()
            return len(self._slots)


def parse_multipart(body: bytes, content_type: str) -> dict[str, tuple[str | None, bytes]]:
    """Minimal multipart/form-data parser on top of the stdlib MIME machinery.

    Returns {field name: (filename or None, raw bytes)}. Good enough for the
    browser- and httpx-generated bodies this service receives.
    """
    header = f"Content-Type: {content_type}\r\nMIME-Version: 1.0\r\n\r\n".encode("ascii")
    message = email.parser.BytesParser(policy=email.policy.HTTP).parsebytes(header + body)
    if not message.is_multipart():
        raise InputError("expected a multipart/form-data body")
    fields: dict[str, tuple[str | None, bytes]] = {}
    for part in message.iter_parts():
        name = part.get_param("name", header="content-disposition")
        if not name:
            continue
        payload = part.get_payload(decode=True) or b""
        fields[str(name)] = (part.get_filename(), payload)
    return fields


def _score(value: float | None) -> float | None:
    return None if value is None else round(float(value), 6)


def _card(db: CaseDatabase, row) -> dict[str, Any]:
    case = db.case(row.case_id)
    snippet = None
    best_aspect = None
    if row.best_entry_id:
        for entry in case.entries:
            if entry.entry_id == row.best_entry_id:
                snippet = entry.text
                best_aspect = entry.aspect.value
                break
    best_asset = None
    if row.best_asset_id:
        asset = case.asset(row.best_asset_id)
        if asset is not None:
            best_asset = {"asset_id": asset.asset_id, "source_path": asset.source_path}
    aspect_tags = sorted(
        {e.aspect.value for e in case.entries if e.aspect is not Aspect.ORIGINAL_TEXT}
    )
    return {
        "case_id": row.case_id,
        "title": case.title,
        "score": _score(row.fused_score),
        "snippet": snippet,
        "best_aspect": best_aspect,
        "best_asset": best_asset,
        "aspect_tags": aspect_tags,
    }


def _liked_card(db: CaseDatabase, case_id: CaseId) -> dict[str, Any]:
    case = db.case(case_id)
    return {
        "case_id": case_id,
        "title": case.title,
        "score": None,
        "snippet": None,
        "best_aspect": None,
        "best_asset": None,
        "aspect_tags": sorted(
            {e.aspect.value for e in case.entries if e.aspect is not Aspect.ORIGINAL_TEXT}
        ),
    }


def api_result(
    db: CaseDatabase,
    session: Session,
    result: RankedResult,
    analyses: dict[Aspect, tuple[str, ...]] | None = None,
    weights: AspectWeights | None = None,
) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "session_id": session.session_id,
        "cards": [_card(db, row) for row in result.rows],
        "liked": [_liked_card(db, cid) for cid in session.liked],
        "weights": weights.to_mapping() if weights is not None else None,
    }
    if analyses is not None:
        payload["analyses"] = {
            aspect.value: list(analyses.get(aspect, ())) for aspect in CRITIQUE_ASPECTS
        }
    return payload


def _case_detail(case: DesignCase) -> dict[str, Any]:
    entries_by_aspect: dict[str, list[dict[str, str]]] = {}
    for entry in case.entries:
        entries_by_aspect.setdefault(entry.aspect.value, []).append(
            {"entry_id": entry.entry_id, "text": entry.text, "origin": entry.origin}
        )
    return {
        "case_id": case.case_id,
        "title": case.title,
        "description": case.description,
        "assets": [
            {
                "asset_id": a.asset_id,
                "kind": a.kind.value,
                "source_path": a.source_path,
                "category_hint": a.category_hint,
            }
            for a in case.assets
        ],
        "entries_by_aspect": entries_by_aspect,
        "entry_count": len(case.entries),
    }


def _http_error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(
    db: CaseDatabase,
    gateway: EmbeddingGateway,
    vlm=None,
    options: SearchOptions = SearchOptions(),
    seed: int = 0,
    session_ttl_seconds: float = 3600.0,
    ui_dir: str | None = None,
    max_image_bytes: int = DEFAULT_MAX_IMAGE_BYTES,
) -> FastAPI:
    app = FastAPI(title="archseek", version=__version__)
    store = SessionStore(ttl_seconds=session_ttl_seconds)
    app.state.sessions = store
    app.state.database = db

    @app.exception_handler(ArchSeekError)
    async def handle_domain_errors(request: Request, exc: ArchSeekError):
        if isinstance(exc, TransportError):
            return _http_error(503, str(exc))
        if isinstance(exc, StateError):
            return _http_error(409, str(exc))
        if isinstance(exc, (AugmentationError, ConfigurationError)):
            return _http_error(503, str(exc))
        return _http_error(400, str(exc))

    @app.get("/api/v1/health")
    def health() -> dict[str, Any]:
        return {"version": __version__, "cases": len(db), "sessions": len(store)}

    @app.post("/api/v1/query/text")
    def query_text(body: TextQueryBody) -> JSONResponse:
        query = body.query.strip()
        if not query:
            return _http_error(400, "query must be non-empty")
        session = start_session(
            db, gateway, origin=TextOrigin(query), seed=seed, options=options
        )
        store.put(session)
        return JSONResponse(api_result(db, session, session.current))

    @app.post("/api/v1/query/image")
    async def query_image(request: Request) -> JSONResponse:
        content_type = request.headers.get("content-type", "")
        if not content_type.startswith("multipart/form-data"):
            return _http_error(415, "expected multipart/form-data")
        body = await request.body()
        if len(body) > max_image_bytes:
            return _http_error(413, "image too large")
        try:
            fields = parse_multipart(body, content_type)
        except InputError as exc:
            return _http_error(400, str(exc))
        if "image" not in fields:
            return _http_error(400, "missing 'image' field")
        _, image_bytes = fields["image"]
        media_type = sniff_media_type(image_bytes)
        if media_type is None:
            return _http_error(415, "image content is not png or jpeg")

        weights = AspectWeights.uniform()
        if "weights" in fields:
            try:
                raw = json.loads(fields["weights"][1].decode("utf-8"))
                weights = AspectWeights.from_mapping(raw)
            except (ValueError, InputError) as exc:
                return _http_error(400, f"bad weights: {exc}")

        if vlm is None:
            return _http_error(503, "no vision-language provider configured")
        try:
            outcome = image_query(
                db, image_bytes, media_type, gateway, vlm, weights=weights, options=options
            )
        except InputError as exc:
            return _http_error(422, str(exc))

        origin = ImageOrigin(analyses=outcome.cache.analyses(), weights=weights)
        session = start_session(
            db, gateway, origin=origin, seed=seed, options=options,
            origin_cache=outcome.cache,
        )
        store.put(session, cache=outcome.cache)
        return JSONResponse(
            api_result(
                db, session, session.current,
                analyses=outcome.cache.analyses(), weights=weights,
            )
        )

    @app.post("/api/v1/session/{session_id}/weights")
    def reweight(session_id: str, body: WeightsBody) -> JSONResponse:
        slot = store.get(session_id)
        if slot is None:
            return _http_error(404, "unknown session")
        if slot.cache is None:
            return _http_error(409, "session has no image-query results to reweight")
        try:
            weights = AspectWeights.from_mapping(body.weights)
        except InputError as exc:
            return _http_error(400, str(exc))
        with slot.lock:
            result = rerank_with_weights(slot.cache, weights)
            origin = ImageOrigin(analyses=slot.cache.analyses(), weights=weights)
            session = Session(
                session_id=slot.session.session_id,
                seed=slot.session.seed,
                origin=origin,
                liked=slot.session.liked,
                current=result.without_cases(slot.session.liked),
                options=slot.session.options,
            )
            store.put(session, cache=slot.cache)
        return JSONResponse(
            api_result(db, session, session.current,
                       analyses=slot.cache.analyses(), weights=weights)
        )

    @app.post("/api/v1/session/{session_id}/like")
    def like_case(session_id: str, body: LikeBody) -> JSONResponse:
        slot = store.get(session_id)
        if slot is None:
            return _http_error(404, "unknown session")
        if not db.has_case(body.case_id):
            return _http_error(404, f"unknown case {body.case_id}")
        if body.case_id in slot.session.liked:
            return _http_error(409, f"case {body.case_id} already liked")
        with slot.lock:
            session = like(db, gateway, slot.session, body.case_id, origin_cache=slot.cache)
            store.put(session, cache=slot.cache)
        return JSONResponse(api_result(db, session, session.current))

    @app.delete("/api/v1/session/{session_id}/like/{case_id}")
    def unlike_case(session_id: str, case_id: int) -> JSONResponse:
        slot = store.get(session_id)
        if slot is None:
            return _http_error(404, "unknown session")
        if case_id not in slot.session.liked:
            return _http_error(409, f"case {case_id} is not liked")
        with slot.lock:
            session = unlike(db, gateway, slot.session, case_id, origin_cache=slot.cache)
            store.put(session, cache=slot.cache)
        return JSONResponse(api_result(db, session, session.current))

    @app.post("/api/v1/session/browse")
    def browse(body: BrowseBody) -> JSONResponse:
        browse_seed = body.seed if body.seed is not None else seed
        session = start_session(db, gateway, origin=None, seed=browse_seed, options=options)
        store.put(session)
        return JSONResponse(api_result(db, session, session.current))

    @app.get("/api/v1/session/{session_id}")
    def session_state(session_id: str) -> JSONResponse:
        slot = store.get(session_id)
        if slot is None:
            return _http_error(404, "unknown session")
        analyses = None
        weights = None
        if isinstance(slot.session.origin, ImageOrigin):
            analyses = dict(slot.session.origin.analyses)
            weights = slot.session.origin.weights
        return JSONResponse(
            api_result(db, slot.session, slot.session.current, analyses=analyses, weights=weights)
        )

    @app.get("/api/v1/cases/{case_id}")
    def case_detail(case_id: int) -> JSONResponse:
        if not db.has_case(case_id):
            return _http_error(404, f"unknown case {case_id}")
        return JSONResponse(_case_detail(db.case(case_id)))

    if ui_dir:
        app.mount("/app", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
