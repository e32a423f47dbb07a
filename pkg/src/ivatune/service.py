"""Session-scoped HTTP API over the optimization engine.

Each session is an independent state machine guarded by its own lock, so
requests for different sessions run concurrently while requests within one
session are serialized. When a data directory is configured, every rating is
appended to that session's JSONL log (flushed and fsynced) *before* the
response is emitted.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import persistence
from .design_space import QuestionnaireResponse
from .errors import (
    ProtocolError,
    SessionCompleteError,
    ValidationError,
)
from .scenario import presentation_descriptor
from .session import Condition, Session


class CreateSessionRequest(BaseModel):
    condition: str
    seed: int | None = None
    disposition_score: int | None = None
    sampling_budget: int | None = None
    optimization_budget: int | None = None


class RatingRequest(BaseModel):
    md_raw: int
    pred1_raw: int
    pred2_raw: int
    use1_raw: int
    use2_raw: int


def _error(status: int, code: str, contract: str, detail: str = "") -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "contract": contract, "detail": detail})


class SessionRegistry:
    def __init__(self, data_dir: Path | None):
        self.data_dir = data_dir
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._registry_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        if self.data_dir is not None:
            persistence.write_session_meta(self.data_dir, session)

    def get(self, session_id: str):
        with self._registry_lock:
            session = self._sessions.get(session_id)
            lock = self._locks.get(session_id)
        return session, lock

    def log_path(self, session_id: str) -> Path | None:
        if self.data_dir is None:
            return None
        return Path(self.data_dir) / f"{session_id}.jsonl"


def _session_descriptor(session: Session) -> dict:
    return {
        "session_id": session.id,
        "condition": session.condition.value,
        "seed": session.seed,
        "sampling_budget": session.sampling_budget,
        "optimization_budget": session.optimization_budget,
        "disposition_score": session.disposition_score,
        "fixed_loa_step": session.fixed_loa_step,
        "phase": session.phase.value,
        "iterations_completed": len(session.observations),
    }


def create_app(data_dir=None) -> FastAPI:
    app = FastAPI(title="ivatune session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    registry = SessionRegistry(Path(data_dir) if data_dir else None)
    app.state.registry = registry

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            condition = Condition(req.condition.lower())
        except ValueError:
            return _error(422, "invalid_condition",
                          "condition must be 'trained' or 'fixed'", req.condition)
        try:
            session = Session(
                condition,
                seed=req.seed if req.seed is not None else 3,
                disposition_score=req.disposition_score,
                sampling_budget=req.sampling_budget,
                optimization_budget=req.optimization_budget,
            )
        except ValidationError as exc:
            return _error(422, "invalid_session_request",
                          "FixedLoA requires disposition_score in [17, 119]; "
                          "budgets and seed must be non-negative", str(exc))
        registry.add(session)
        return _session_descriptor(session)

    def _with_session(session_id: str):
        session, lock = registry.get(session_id)
        if session is None:
            return None, None, _error(404, "unknown_session",
                                      "session_id must come from POST /sessions", session_id)
        return session, lock, None

    @app.get("/sessions/{session_id}")
    def describe_session(session_id: str):
        session, lock, err = _with_session(session_id)
        if err:
            return err
        with lock:
            return _session_descriptor(session)

    @app.get("/sessions/{session_id}/next")
    def next_design(session_id: str):
        session, lock, err = _with_session(session_id)
        if err:
            return err
        with lock:
            if session._pending is not None:
                return _error(409, "rating_pending",
                              "GET /next requires the previous design to be rated first",
                              f"iteration {session.next_iteration} awaits its rating")
            try:
                design = session.next_design()
            except SessionCompleteError as exc:
                return _error(410, "session_complete",
                              "the session's iteration budget is exhausted", str(exc))
            return {
                "iteration": session.next_iteration,
                "phase": session.phase.value,
                "design": {
                    "glow": design.glow,
                    "volume": design.volume,
                    "transparency": design.transparency,
                    "loa": design.loa,
                },
                "presentation": presentation_descriptor(design),
            }

    @app.post("/sessions/{session_id}/ratings")
    def submit_rating(session_id: str, req: RatingRequest):
        session, lock, err = _with_session(session_id)
        if err:
            return err
        with lock:
            try:
                response = QuestionnaireResponse(
                    req.md_raw, req.pred1_raw, req.pred2_raw, req.use1_raw, req.use2_raw,
                )
            except ValidationError as exc:
                return _error(422, "rating_out_of_range",
                              "md_raw in [0,20]; each item in [1,5]", str(exc))
            try:
                obs = session.submit_rating(response)
            except ProtocolError as exc:
                return _error(409, "no_pending_design",
                              "POST /ratings requires a design from GET /next", str(exc))
            record = persistence.record_from_observation(session.id, session.condition, obs)
            log_path = registry.log_path(session.id)
            if log_path is not None:
                # Durability: the append hits disk before this response exists.
                persistence.append_record(log_path, record)
            return {
                "observation": {
                    "iteration": obs.iteration,
                    "phase": obs.phase.value,
                    "design": {
                        "glow": obs.design.glow,
                        "volume": obs.design.volume,
                        "transparency": obs.design.transparency,
                        "loa": obs.design.loa,
                    },
                    "mental_demand": obs.objectives.mental_demand,
                    "predictability": obs.objectives.predictability,
                    "usefulness": obs.objectives.usefulness,
                    "timestamp": obs.timestamp,
                },
                "session": _session_descriptor(session),
            }

    @app.get("/sessions/{session_id}/pareto")
    def pareto(session_id: str):
        session, lock, err = _with_session(session_id)
        if err:
            return err
        with lock:
            if not session.observations:
                return _error(409, "no_observations",
                              "the Pareto front needs at least one rated design")
            front = session.pareto()
            return {
                "reference_point": front.reference_point.tolist(),
                "points": [
                    {
                        "iteration": session.observations[i].iteration,
                        "canonical": front.points[j].tolist(),
                        "mental_demand": session.observations[i].objectives.mental_demand,
                        "predictability": session.observations[i].objectives.predictability,
                        "usefulness": session.observations[i].objectives.usefulness,
                        "design": {
                            "glow": session.observations[i].design.glow,
                            "volume": session.observations[i].design.volume,
                            "transparency": session.observations[i].design.transparency,
                            "loa": session.observations[i].design.loa,
                        },
                    }
                    for j, i in enumerate(front.members)
                ],
                "hypervolume": front.hypervolume(),
            }

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str, format: str = Query("jsonl")):
        session, lock, err = _with_session(session_id)
        if err:
            return err
        with lock:
            records = persistence.session_records(session)
            if format == "jsonl":
                body = "".join(r.to_json_line() + "\n" for r in records)
                return PlainTextResponse(body, media_type="application/x-ndjson")
            if format == "csv":
                return PlainTextResponse(persistence.records_to_csv(records),
                                         media_type="text/csv")
            return _error(422, "invalid_format", "format must be 'jsonl' or 'csv'", format)

    return app
