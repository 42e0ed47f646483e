"""HTTP interface: solving endpoints plus interactive proof sessions."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import HypergamesError, ParseError, ResourceLimitError, ValidationError
from . import ops
from .sessions import (
    DEFAULT_HORIZON,
    SessionStore,
    apply_move,
    auto_move,
    create_session,
    session_summary,
    transcript_payload,
    view_payload,
)


class CheckRequest(BaseModel):
    ks: str
    formula: str
    prophecy: str = ""
    mode: str = "auto"
    max_memory: int = Field(default=2, ge=1)
    budget: int = Field(default=10_000_000, ge=1)
    obs_mode: str = "hierarchical"


class CheckResponse(BaseModel):
    status: str
    method: str
    guarantee: str
    detail: str
    bounds: dict[str, int]
    witness: dict | None
    certificate: str | None


class OracleRequest(BaseModel):
    ks: str
    formula: str
    stem: int = Field(ge=1)
    loop: int = Field(ge=1)


class OracleResponse(BaseModel):
    holds: bool
    stem: int
    loop: int


class CertifyRequest(BaseModel):
    certificate: str


class CertifyResponse(BaseModel):
    ok: bool
    errors: list[str]
    diagnostics: list[str]
    nodes: int
    edges: int
    game_hash: str


class PolicySpec(BaseModel):
    kind: str
    seed: int = 0
    certificate: str = ""

    def as_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "certificate": self.certificate}


class SessionRequest(BaseModel):
    ks: str
    formula: str
    prophecy: str = ""
    human_players: list[int] = Field(default_factory=list)
    opponent: PolicySpec | None = None
    assist: PolicySpec | None = None
    horizon: int = Field(default=DEFAULT_HORIZON, ge=1)
    obs_mode: str = "hierarchical"


class MoveRequest(BaseModel):
    player: int
    direction: str


class AutoRequest(BaseModel):
    player: int


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def create_app() -> FastAPI:
    """Application factory; session state lives for the process lifetime."""
    app = FastAPI(title="hypergames")
    store = SessionStore()

    @app.exception_handler(RequestValidationError)
    def invalid_request(request, exc):
        # the error contract promises 400 for malformed input
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def get_session(sid: str):
        try:
            return store.get(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True}

    @app.post("/check", response_model=CheckResponse)
    def check(req: CheckRequest):
        try:
            return ops.run_check(
                req.ks,
                req.formula,
                prophecy_text=req.prophecy,
                mode=req.mode,
                max_memory=req.max_memory,
                budget=req.budget,
                obs_mode=req.obs_mode,
            )
        except (ParseError, ValidationError, ResourceLimitError) as exc:
            raise _bad_request(exc)

    @app.post("/oracle", response_model=OracleResponse)
    def oracle(req: OracleRequest):
        try:
            return ops.run_oracle(req.ks, req.formula, req.stem, req.loop)
        except (ParseError, ValidationError, ResourceLimitError) as exc:
            raise _bad_request(exc)

    @app.post("/certify", response_model=CertifyResponse)
    def certify(req: CertifyRequest):
        try:
            return ops.run_certify(req.certificate)
        except (ParseError, ValidationError, ResourceLimitError) as exc:
            raise _bad_request(exc)

    @app.post("/sessions")
    def new_session(req: SessionRequest):
        try:
            session = create_session(
                req.ks,
                req.formula,
                prophecy_text=req.prophecy,
                human_players=tuple(req.human_players),
                opponent=req.opponent.as_dict() if req.opponent else None,
                assist=req.assist.as_dict() if req.assist else None,
                horizon=req.horizon,
                obs_mode=req.obs_mode,
            )
        except (ParseError, ValidationError, ResourceLimitError) as exc:
            raise _bad_request(exc)
        store.add(session)
        out = session_summary(session)
        out["views"] = {str(p): view_payload(session, p) for p in sorted(session.humans)}
        return out

    @app.get("/sessions/{sid}/view")
    def view(sid: str, player: int):
        session = get_session(sid)
        with session.lock:
            try:
                return view_payload(session, player)
            except PermissionError as exc:
                raise HTTPException(status_code=403, detail=str(exc))
            except ValidationError as exc:
                raise _bad_request(exc)

    @app.post("/sessions/{sid}/move")
    def move(sid: str, req: MoveRequest):
        session = get_session(sid)
        with session.lock:
            try:
                apply_move(session, req.player, req.direction)
            except PermissionError as exc:
                raise HTTPException(status_code=403, detail=str(exc))
            except (ValidationError, HypergamesError) as exc:
                raise _bad_request(exc)
            return view_payload(session, req.player)

    @app.post("/sessions/{sid}/auto")
    def auto(sid: str, req: AutoRequest):
        session = get_session(sid)
        with session.lock:
            try:
                auto_move(session, req.player)
            except PermissionError as exc:
                raise HTTPException(status_code=403, detail=str(exc))
            except (ValidationError, HypergamesError) as exc:
                raise _bad_request(exc)
            return view_payload(session, req.player)

    @app.get("/sessions/{sid}/transcript")
    def transcript(sid: str, player: int | None = None):
        session = get_session(sid)
        with session.lock:
            try:
                return transcript_payload(session, player)
            except PermissionError as exc:
                raise HTTPException(status_code=403, detail=str(exc))
            except ValidationError as exc:
                raise _bad_request(exc)

    return app
