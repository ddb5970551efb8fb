"""HTTP API consumed by the browser UI and the CLI.

Turn execution streams server-sent events (phase-started, tool-call,
tool-result, clarification, final, error); sessions, feedback, traces and
workspace artifacts are plain JSON/file endpoints. Auth is a bearer token
mapped to a user id through a pluggable verifier (static token map by
default, enough for desk scale).
"""

from __future__ import annotations

import json
import mimetypes
import queue
import threading
from typing import Callable

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from ..engine.events import EventEmitter
from ..engine.orchestrator import FEEDBACK_ACTIONS, apply_feedback, orchestrate_turn
from ..errors import NotFoundError, NotOwnerError, PreconditionError, SolverkitError

STREAM_END = "stream-end"


class SessionCreate(BaseModel):
    title: str | None = None


class SessionPatch(BaseModel):
    title: str | None = None
    saved: bool | None = None
    notes: str | None = None


class TurnRequest(BaseModel):
    message: str


class FeedbackRequest(BaseModel):
    action: str
    critique: str = ""


def static_token_verifier(tokens: dict[str, str]) -> Callable[[str], str | None]:
    def verify(token: str) -> str | None:
        return tokens.get(token)
    return verify


def _sse(event: dict) -> str:
    return (f"id: {event.get('id', 0)}\n"
            f"event: {event['event']}\n"
            f"data: {json.dumps(event.get('data', {}))}\n\n")


def create_app(stack, verify_token: Callable[[str], str | None] | None = None,
               frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="solverkit", version="0.1.0")
    verify = verify_token or static_token_verifier(stack.config.tokens)
    active_turns: set[str] = set()
    active_lock = threading.Lock()
    # last stream buffer per session so dropped clients can resume without
    # duplicates (filtered by event id)
    event_buffers: dict[str, EventEmitter] = {}
    store = stack.sessions

    def current_user(authorization: str = Header(default="")) -> str:
        if not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        user_id = verify(authorization.removeprefix("Bearer ").strip())
        if not user_id:
            raise HTTPException(status_code=401, detail="unknown token")
        return user_id

    @app.exception_handler(SolverkitError)
    async def _domain_error(request: Request, exc: SolverkitError):
        status = {
            NotFoundError.kind: 404,
            NotOwnerError.kind: 403,
            PreconditionError.kind: 409,
        }.get(exc.kind, 400)
        return JSONResponse(status_code=status,
                            content={"error": exc.kind, "message": exc.message})

    @app.post("/api/sessions")
    def create_session(body: SessionCreate,
                       user: str = Depends(current_user)):
        session = store.create_session(user, title=body.title)
        return session.to_doc(with_turns=False)

    @app.get("/api/sessions")
    def list_sessions(user: str = Depends(current_user),
                      saved: bool = False):
        return [s.to_doc(with_turns=False)
                for s in store.list_sessions(user, saved_only=saved)]

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str, user: str = Depends(current_user)):
        return store.resume_session(user, session_id).to_doc()

    @app.patch("/api/sessions/{session_id}")
    def patch_session(session_id: str, body: SessionPatch,
                      user: str = Depends(current_user)):
        session = store.update_meta(user, session_id, title=body.title,
                                    saved=body.saved, notes=body.notes)
        return session.to_doc(with_turns=False)

    @app.post("/api/sessions/{session_id}/turns")
    def run_turn(session_id: str, body: TurnRequest,
                 user: str = Depends(current_user)):
        session = store.resume_session(user, session_id)
        with active_lock:
            if session_id in active_turns:
                raise HTTPException(status_code=409,
                                    detail="a turn is already streaming")
            active_turns.add(session_id)

        events: queue.Queue = queue.Queue()
        emitter = EventEmitter(sink=events.put)
        event_buffers[session_id] = emitter
        runtime = stack.runtime(emitter)

        def work() -> None:
            try:
                orchestrate_turn(runtime, session, body.message)
            except SolverkitError as exc:
                emitter.emit("error", {"kind": exc.kind, "message": exc.message})
            except Exception as exc:  # pragma: no cover - defensive
                emitter.emit("error", {"kind": "internal", "message": str(exc)})
            finally:
                events.put({"event": STREAM_END, "data": {}})

        thread = threading.Thread(target=work, name=f"turn-{session_id}",
                                  daemon=True)
        thread.start()

        def stream():
            try:
                while True:
                    event = events.get()
                    if event.get("event") == STREAM_END:
                        break
                    yield _sse(event)
            finally:
                with active_lock:
                    active_turns.discard(session_id)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/api/sessions/{session_id}/events")
    def buffered_events(session_id: str, after: int = -1,
                        user: str = Depends(current_user)):
        store.resume_session(user, session_id)  # ownership check
        emitter = event_buffers.get(session_id)
        if emitter is None:
            return {"events": []}
        return {"events": [e for e in emitter.events if e["id"] > after]}

    @app.post("/api/sessions/{session_id}/feedback")
    def feedback(session_id: str, body: FeedbackRequest,
                 user: str = Depends(current_user)):
        if body.action not in FEEDBACK_ACTIONS:
            raise HTTPException(status_code=422,
                                detail=f"action must be one of {FEEDBACK_ACTIONS}")
        session = store.resume_session(user, session_id)
        runtime = stack.runtime(EventEmitter())
        effect = apply_feedback(runtime, session, body.action, body.critique)
        if body.action == "terminate":
            store.close_session(user, session_id)
        return effect

    @app.get("/api/turns/{turn_id}/trace")
    def trace(turn_id: str, user: str = Depends(current_user)):
        found = store.get_turn(turn_id)
        if found is None:
            return {"turn_id": turn_id, "trace": None}
        _, session_id = found
        session = store.resume_session(user, session_id)  # ownership check
        assert session is not None
        return {"turn_id": turn_id, "trace": store.fetch_trace(turn_id)}

    @app.get("/api/artifacts/{path:path}")
    def artifact(path: str, user: str = Depends(current_user)):
        resolved = stack.policy.resolve(path)
        if not resolved.is_file():
            raise HTTPException(status_code=404, detail="no such artifact")
        media, _ = mimetypes.guess_type(str(resolved))
        return Response(content=resolved.read_bytes(),
                        media_type=media or "application/octet-stream")

    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")

    return app
