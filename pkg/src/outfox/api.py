"""Transport layer over the platform. No business logic lives here.

Every handler validates auth, acquires the single platform lock, calls
one platform operation, and shapes the response. Stats responses are
canonically serialized so they are byte-identical to the stats CLI
output for the same round.
"""

from __future__ import annotations

import threading
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .analytics import canonical_stats_json
from .assembly import Split
from .config import DeploymentConfig, round_config_from_dict
from .domain import Context, genre_from_token, label_from_token
from .errors import (
    ConfigError,
    OutfoxError,
    PhraseParseError,
    PoolExhaustedError,
    StateError,
    TryLimitExceeded,
    ValidationError,
)
from .service import Platform


class AuthContext(BaseModel):
    annotator_id: str
    admin: bool = False


class RoundBody(BaseModel):
    config: dict


class SessionBody(BaseModel):
    writer_id: str
    round: int


class AttemptBody(BaseModel):
    hypothesis: str
    try_index: int | None = Field(default=None, description="idempotency key for retries")


class ReasonBody(BaseModel):
    text: str


class VerdictBody(BaseModel):
    label: str


def create_app(platform: Platform, config: DeploymentConfig) -> FastAPI:
    app = FastAPI(title="outfox", docs_url=None, redoc_url=None)
    tokens = config.token_map()
    lock = threading.Lock()

    def auth(authorization: str | None = Header(default=None)) -> AuthContext:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        entry = tokens.get(authorization.removeprefix("Bearer ").strip())
        if entry is None:
            raise HTTPException(status_code=401, detail="unknown token")
        return AuthContext(annotator_id=entry.annotator_id, admin=entry.admin)

    def require_admin(ctx: AuthContext) -> None:
        if not ctx.admin:
            raise HTTPException(status_code=403, detail="admin token required")

    def require_self(ctx: AuthContext, annotator_id: str) -> None:
        if not ctx.admin and ctx.annotator_id != annotator_id:
            raise HTTPException(status_code=403, detail="token does not match annotator")

    @app.exception_handler(OutfoxError)
    async def outfox_errors(_request: Request, exc: OutfoxError):
        status = 400
        if isinstance(exc, (StateError, TryLimitExceeded, PoolExhaustedError)):
            status = 409
        if isinstance(exc, ValidationError) and str(exc).startswith(("no such", "unknown")):
            status = 404
        if isinstance(exc, ConfigError):
            status = 500
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "events": len(platform.store)}

    @app.post("/api/rounds")
    def open_round(body: RoundBody, ctx: AuthContext = Depends(auth)) -> dict:
        require_admin(ctx)
        round_config = round_config_from_dict(body.config)
        with lock:
            number = platform.open_round(round_config)
        return {"round": number}

    @app.post("/api/contexts")
    def add_context(body: dict, ctx: AuthContext = Depends(auth)) -> dict:
        require_admin(ctx)
        context = Context(
            id=str(body["id"]),
            text=str(body["text"]),
            genre=genre_from_token(str(body.get("genre", "wiki"))),
            source=str(body.get("source", "")),
            round=int(body["round"]),
        )
        with lock:
            platform.add_context(context)
        return {"id": context.id}

    @app.post("/api/sessions")
    def open_session(body: SessionBody, ctx: AuthContext = Depends(auth)) -> dict:
        require_self(ctx, body.writer_id)
        with lock:
            view = platform.open_session(body.writer_id, body.round)
        # the writer sees the phrased target, not the raw label
        return {
            "session_id": view["session_id"],
            "round": view["round"],
            "context": view["context"],
            "target_phrase": view["target_phrase"],
            "tries_remaining": view["tries_remaining"],
        }

    @app.post("/api/sessions/{session_id}/attempts")
    def submit_attempt(session_id: str, body: AttemptBody, ctx: AuthContext = Depends(auth)) -> dict:
        with lock:
            require_self(ctx, platform.session_writer(session_id))
            result = platform.submit_attempt(session_id, body.hypothesis, body.try_index)
        return {
            "try_index": result["try_index"],
            "probabilities": result["probabilities"],
            "fooled": result["fooled"],
            "tries_remaining": result["tries_remaining"],
            "state": result["state"],
            "replayed": result["replayed"],
        }

    @app.post("/api/sessions/{session_id}/reason")
    def submit_reason(session_id: str, body: ReasonBody, ctx: AuthContext = Depends(auth)) -> dict:
        with lock:
            require_self(ctx, platform.session_writer(session_id))
            result = platform.submit_reason(session_id, body.text)
        return {"state": result["state"], "replayed": result["replayed"]}

    @app.get("/api/verify/next")
    def next_case(
        verifier: str = Query(...),
        round: int | None = Query(default=None),
        ctx: AuthContext = Depends(auth),
    ) -> dict:
        require_self(ctx, verifier)
        with lock:
            case = platform.next_case(verifier, round)
        if case is None:
            return {"case": None}
        # writer label stays hidden: verification is blind
        return {"case": case}

    @app.post("/api/verify/{case_id}")
    def record_verdict(case_id: str, body: VerdictBody, ctx: AuthContext = Depends(auth)) -> dict:
        try:
            label = label_from_token(body.label)
        except PhraseParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        with lock:
            result = platform.record_verdict(case_id, ctx.annotator_id, label)
        return result

    @app.post("/api/rounds/{round_number}/close")
    def close_round(round_number: int, ctx: AuthContext = Depends(auth)) -> dict:
        require_admin(ctx)
        with lock:
            result = platform.close_round(round_number)
        return {"round": round_number, "abandoned_sessions": result["abandoned_sessions"]}

    @app.post("/api/rounds/{round_number}/splits")
    def assign_splits(
        round_number: int,
        seed: int | None = Query(default=None),
        ctx: AuthContext = Depends(auth),
    ) -> dict:
        require_admin(ctx)
        with lock:
            assignment = platform.assign_round_splits(round_number, seed)
        return {
            "round": round_number,
            "counts": {
                split.value: len(assignment.members(split)) for split in Split
            },
        }

    @app.get("/api/rounds/{round_number}/stats")
    def round_stats(
        round_number: int,
        allow_pending: bool = Query(default=False),
        ctx: AuthContext = Depends(auth),
    ) -> Response:
        with lock:
            stats = platform.round_stats(round_number, allow_pending=allow_pending)
        return Response(content=canonical_stats_json(stats), media_type="application/json")

    @app.get("/api/rounds/{round_number}/export")
    def export_split(
        round_number: int,
        split: str = Query(default="dev"),
        ctx: AuthContext = Depends(auth),
    ) -> PlainTextResponse:
        require_admin(ctx)
        try:
            split_value = Split(split)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown split {split!r}") from None
        with lock:
            text = platform.export_round_text(round_number, split_value, allow_empty=True)
        return PlainTextResponse(content=text, media_type="application/x-ndjson")

    if config.ui_dir is not None and config.ui_dir.exists():
        app.mount("/ui", StaticFiles(directory=str(config.ui_dir), html=True), name="ui")

    return app
