"""HTTP surface over the session engine.

POST /sessions
POST /sessions/{id}/events          body: array of session-log records
GET  /sessions/{id}/questions?since={revision}   long-poll, 25 s default
POST /questions/{qid}/response      body: {mode, answer_text?}
GET  /sessions/{id}/documentation
GET  /sessions/{id}/steps
GET  /sessions/{id}/snapshots/{ref}
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Request, Response

from ..model import MalformedRecord, InvariantViolation, RESPONSE_MODES, parse_session_log
from .engine import (
    AlreadyResolved,
    OrderViolation,
    SessionEngine,
    StorageFailure,
    UnknownQuestion,
    UnknownSession,
)

DEFAULT_POLL_TIMEOUT = 25.0


def create_app(engine: SessionEngine, poll_timeout: float = DEFAULT_POLL_TIMEOUT) -> FastAPI:
    app = FastAPI(title="declink session service")

    @app.post("/sessions")
    def create_session() -> dict:
        try:
            session_id = engine.create_session()
        except StorageFailure as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/events")
    async def append_events(session_id: str, request: Request) -> dict:
        body = await request.body()
        try:
            records = json.loads(body)
        except json.JSONDecodeError:
            raise HTTPException(status_code=422, detail="body must be a JSON array of events")
        if not isinstance(records, list):
            raise HTTPException(status_code=422, detail="body must be a JSON array of events")
        try:
            events = parse_session_log(json.dumps(rec, ensure_ascii=False) for rec in records)
        except (MalformedRecord, InvariantViolation) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            accepted = engine.append_events(session_id, events)
        except UnknownSession:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        except OrderViolation as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"accepted": accepted, "revision": engine.get_steps(session_id)["revision"]}

    @app.get("/sessions/{session_id}/questions")
    def poll_questions(session_id: str, since: int = Query(default=0)) -> dict:
        try:
            return engine.wait_questions(session_id, since, timeout=poll_timeout)
        except UnknownSession:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.post("/questions/{question_id}/response")
    async def submit_response(question_id: str, request: Request) -> dict:
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            raise HTTPException(status_code=422, detail="body must be a JSON object")
        mode = body.get("mode")
        if mode not in RESPONSE_MODES:
            raise HTTPException(status_code=422, detail=f"mode must be one of {RESPONSE_MODES}")
        try:
            return engine.submit_response(question_id, mode, body.get("answer_text"))
        except UnknownQuestion:
            raise HTTPException(status_code=404, detail=f"unknown question {question_id}")
        except AlreadyResolved:
            raise HTTPException(status_code=409, detail=f"question {question_id} already resolved")
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/sessions/{session_id}/documentation")
    def get_documentation(session_id: str) -> dict:
        try:
            return engine.get_documentation(session_id)
        except UnknownSession:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.get("/sessions/{session_id}/steps")
    def get_steps(session_id: str) -> dict:
        try:
            return engine.get_steps(session_id)
        except UnknownSession:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.get("/sessions/{session_id}/snapshots/{ref}")
    def get_snapshot(session_id: str, ref: str) -> Response:
        try:
            engine.get_steps(session_id)
        except UnknownSession:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        if not engine.snapshots.has(ref):
            raise HTTPException(status_code=404, detail=f"unknown snapshot {ref}")
        return Response(content=engine.snapshots.load(ref), media_type="application/octet-stream")

    return app
