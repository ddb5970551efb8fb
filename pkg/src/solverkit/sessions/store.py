"""Persistent sessions, turns and trace spans in one embedded store.

Turns are durable before the append acks (a crash right after the ack
loses nothing). Spans are inserted when opened and sealed when closed;
a closed span never changes. Sessions and everything under them are
readable only by their owning user.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..clockutil import Clock, iso
from ..errors import (
    NotFoundError,
    NotOwnerError,
    OrphanSpanError,
    PreconditionError,
    StorageFailureError,
)

SPAN_PAYLOAD_CAP = 64 * 1024
SPAN_KINDS = ("turn", "agent-phase", "tool-call", "model-call")


@dataclass
class TraceSpan:
    span_id: str
    kind: str
    name: str
    turn_id: str | None = None
    parent: str | None = None
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    started_at: str = ""
    elapsed_ms: int = 0
    status: str = "running"  # running | ok | error

    def to_doc(self) -> dict:
        return {
            "span_id": self.span_id,
            "parent": self.parent,
            "turn_id": self.turn_id,
            "kind": self.kind,
            "name": self.name,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "started_at": self.started_at,
            "elapsed_ms": self.elapsed_ms,
            "status": self.status,
        }


@dataclass
class Turn:
    turn_id: str
    user_message: str
    decision: dict = field(default_factory=dict)
    outputs: dict | None = None
    feedback: str | None = None
    trace_root: str | None = None
    created_at: str = ""

    def to_doc(self) -> dict:
        return {
            "turn_id": self.turn_id,
            "user_message": self.user_message,
            "decision": self.decision,
            "outputs": self.outputs,
            "feedback": self.feedback,
            "trace_root": self.trace_root,
            "created_at": self.created_at,
        }


@dataclass
class Session:
    session_id: str
    user_id: str
    title: str | None = None
    saved: bool = False
    notes: str | None = None
    created_at: str = ""
    closed: bool = False
    turns: list[Turn] = field(default_factory=list)

    def to_doc(self, with_turns: bool = True) -> dict:
        doc = {
            "session_id": self.session_id,
            "user_id": self.user_id,
            "title": self.title,
            "saved": self.saved,
            "notes": self.notes,
            "created_at": self.created_at,
            "closed": self.closed,
        }
        if with_turns:
            doc["turns"] = [t.to_doc() for t in self.turns]
        return doc


def _capped(doc: dict) -> str:
    text = json.dumps(doc, default=str)
    if len(text) <= SPAN_PAYLOAD_CAP:
        return text
    return json.dumps({"_truncated": True, "preview": text[:4096]})


class SessionStore:
    def __init__(self, path: str | Path, clock: Clock | None = None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.clock = clock or Clock()
        self._write_lock = threading.Lock()
        with self._connect() as conn:
            conn.executescript(
                """
                CREATE TABLE IF NOT EXISTS sessions (
                  session_id TEXT PRIMARY KEY, user_id TEXT NOT NULL,
                  title TEXT, saved INTEGER NOT NULL DEFAULT 0, notes TEXT,
                  created_at TEXT NOT NULL, closed INTEGER NOT NULL DEFAULT 0);
                CREATE TABLE IF NOT EXISTS turns (
                  turn_id TEXT PRIMARY KEY, session_id TEXT NOT NULL,
                  seq INTEGER NOT NULL, user_message TEXT NOT NULL,
                  decision TEXT, outputs TEXT, feedback TEXT,
                  trace_root TEXT, created_at TEXT NOT NULL);
                CREATE TABLE IF NOT EXISTS spans (
                  span_id TEXT PRIMARY KEY, turn_id TEXT, parent TEXT,
                  kind TEXT NOT NULL, name TEXT NOT NULL,
                  inputs TEXT, outputs TEXT, started_at TEXT,
                  elapsed_ms INTEGER NOT NULL DEFAULT 0,
                  status TEXT NOT NULL DEFAULT 'running',
                  closed INTEGER NOT NULL DEFAULT 0);
                CREATE INDEX IF NOT EXISTS idx_turns_session
                  ON turns (session_id, seq);
                CREATE INDEX IF NOT EXISTS idx_spans_turn ON spans (turn_id);
                """
            )

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.path)
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA synchronous=FULL")
        return conn

    # -- sessions -------------------------------------------------------------

    def create_session(self, user_id: str, title: str | None = None) -> Session:
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            user_id=user_id,
            title=title,
            created_at=iso(self.clock.now()),
        )
        with self._write_lock, self._connect() as conn:
            conn.execute(
                "INSERT INTO sessions VALUES (?,?,?,?,?,?,?)",
                (session.session_id, user_id, title, 0, None,
                 session.created_at, 0),
            )
        return session

    def resume_session(self, user_id: str, session_id: str) -> Session:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT session_id, user_id, title, saved, notes, created_at,"
                " closed FROM sessions WHERE session_id=?", (session_id,),
            ).fetchone()
        if row is None:
            raise NotFoundError(f"no session {session_id}")
        if row[1] != user_id:
            raise NotOwnerError("session belongs to another user")
        session = Session(
            session_id=row[0], user_id=row[1], title=row[2],
            saved=bool(row[3]), notes=row[4], created_at=row[5],
            closed=bool(row[6]),
        )
        session.turns = self._load_turns(session_id)
        return session

    def create_or_resume(self, user_id: str,
                         session_id: str | None = None) -> Session:
        if session_id is None:
            return self.create_session(user_id)
        return self.resume_session(user_id, session_id)

    def list_sessions(self, user_id: str, saved_only: bool = False) -> list[Session]:
        query = ("SELECT session_id, user_id, title, saved, notes, created_at,"
                 " closed FROM sessions WHERE user_id=?")
        if saved_only:
            query += " AND saved=1"
        query += " ORDER BY created_at DESC, session_id"
        with self._connect() as conn:
            rows = conn.execute(query, (user_id,)).fetchall()
        return [Session(r[0], r[1], r[2], bool(r[3]), r[4], r[5], bool(r[6]))
                for r in rows]

    def update_meta(self, user_id: str, session_id: str, *,
                    title: str | None = None, saved: bool | None = None,
                    notes: str | None = None) -> Session:
        self._require_owner(user_id, session_id)
        sets, params = [], []
        if title is not None:
            sets.append("title=?"); params.append(title)
        if saved is not None:
            sets.append("saved=?"); params.append(int(saved))
        if notes is not None:
            sets.append("notes=?"); params.append(notes)
        if sets:
            with self._write_lock, self._connect() as conn:
                conn.execute(
                    f"UPDATE sessions SET {', '.join(sets)} WHERE session_id=?",
                    (*params, session_id),
                )
        return self.resume_session(user_id, session_id)

    def close_session(self, user_id: str, session_id: str) -> None:
        self._require_owner(user_id, session_id)
        with self._write_lock, self._connect() as conn:
            conn.execute("UPDATE sessions SET closed=1 WHERE session_id=?",
                         (session_id,))

    def _require_owner(self, user_id: str, session_id: str) -> None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT user_id FROM sessions WHERE session_id=?",
                (session_id,),
            ).fetchone()
        if row is None:
            raise NotFoundError(f"no session {session_id}")
        if row[0] != user_id:
            raise NotOwnerError("session belongs to another user")

    # -- turns ----------------------------------------------------------------

    def append_turn(self, session: Session, turn: Turn) -> None:
        with self._write_lock, self._connect() as conn:
            row = conn.execute(
                "SELECT closed FROM sessions WHERE session_id=?",
                (session.session_id,),
            ).fetchone()
            if row is None:
                raise NotFoundError(f"no session {session.session_id}")
            if row[0]:
                raise PreconditionError("session is closed")
            (seq,) = conn.execute(
                "SELECT COALESCE(MAX(seq), -1) + 1 FROM turns WHERE session_id=?",
                (session.session_id,),
            ).fetchone()
            if not turn.created_at:
                turn.created_at = iso(self.clock.now())
            try:
                conn.execute(
                    "INSERT INTO turns VALUES (?,?,?,?,?,?,?,?,?)",
                    (turn.turn_id, session.session_id, seq, turn.user_message,
                     json.dumps(turn.decision, default=str),
                     json.dumps(turn.outputs, default=str)
                     if turn.outputs is not None else None,
                     turn.feedback, turn.trace_root, turn.created_at),
                )
                conn.commit()  # durable before ack
            except sqlite3.Error as exc:
                raise StorageFailureError(str(exc)) from exc
        session.turns.append(turn)

    def update_turn(self, turn: Turn) -> None:
        with self._write_lock, self._connect() as conn:
            conn.execute(
                "UPDATE turns SET decision=?, outputs=?, feedback=?,"
                " trace_root=? WHERE turn_id=?",
                (json.dumps(turn.decision, default=str),
                 json.dumps(turn.outputs, default=str)
                 if turn.outputs is not None else None,
                 turn.feedback, turn.trace_root, turn.turn_id),
            )

    def _load_turns(self, session_id: str) -> list[Turn]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT turn_id, user_message, decision, outputs, feedback,"
                " trace_root, created_at FROM turns WHERE session_id=?"
                " ORDER BY seq", (session_id,),
            ).fetchall()
        return [
            Turn(
                turn_id=r[0], user_message=r[1],
                decision=json.loads(r[2]) if r[2] else {},
                outputs=json.loads(r[3]) if r[3] else None,
                feedback=r[4], trace_root=r[5], created_at=r[6],
            )
            for r in rows
        ]

    def get_turn(self, turn_id: str) -> tuple[Turn, str] | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT turn_id, user_message, decision, outputs, feedback,"
                " trace_root, created_at, session_id FROM turns"
                " WHERE turn_id=?", (turn_id,),
            ).fetchone()
        if row is None:
            return None
        turn = Turn(
            turn_id=row[0], user_message=row[1],
            decision=json.loads(row[2]) if row[2] else {},
            outputs=json.loads(row[3]) if row[3] else None,
            feedback=row[4], trace_root=row[5], created_at=row[6],
        )
        return turn, row[7]

    # -- spans ----------------------------------------------------------------

    def open_span(self, span: TraceSpan) -> None:
        with self._write_lock, self._connect() as conn:
            if span.parent is not None:
                row = conn.execute(
                    "SELECT 1 FROM spans WHERE span_id=?", (span.parent,),
                ).fetchone()
                if row is None:
                    raise OrphanSpanError(f"parent span {span.parent} not found")
            elif span.kind != "turn":
                raise OrphanSpanError("non-turn span requires a parent")
            conn.execute(
                "INSERT INTO spans VALUES (?,?,?,?,?,?,?,?,?,?,0)",
                (span.span_id, span.turn_id, span.parent, span.kind, span.name,
                 _capped(span.inputs), _capped(span.outputs),
                 span.started_at, span.elapsed_ms, span.status),
            )

    def close_span(self, span: TraceSpan) -> None:
        with self._write_lock, self._connect() as conn:
            row = conn.execute(
                "SELECT closed FROM spans WHERE span_id=?", (span.span_id,),
            ).fetchone()
            if row is None:
                raise NotFoundError(f"no span {span.span_id}")
            if row[0]:
                return  # immutable once closed
            conn.execute(
                "UPDATE spans SET outputs=?, elapsed_ms=?, status=?, closed=1"
                " WHERE span_id=?",
                (_capped(span.outputs), span.elapsed_ms, span.status,
                 span.span_id),
            )

    def record_span(self, span: TraceSpan) -> None:
        """Insert an already-complete span (open + close in one step)."""
        self.open_span(span)
        span_copy = span
        self.close_span(span_copy)

    def spans_for_turn(self, turn_id: str) -> list[TraceSpan]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT span_id, turn_id, parent, kind, name, inputs, outputs,"
                " started_at, elapsed_ms, status FROM spans WHERE turn_id=?"
                " ORDER BY started_at, span_id", (turn_id,),
            ).fetchall()
        return [
            TraceSpan(
                span_id=r[0], turn_id=r[1], parent=r[2], kind=r[3], name=r[4],
                inputs=json.loads(r[5]) if r[5] else {},
                outputs=json.loads(r[6]) if r[6] else {},
                started_at=r[7], elapsed_ms=r[8], status=r[9],
            )
            for r in rows
        ]

    def fetch_trace(self, turn_id: str) -> dict | None:
        """Span tree for one turn; None when the turn has no spans."""
        spans = self.spans_for_turn(turn_id)
        if not spans:
            return None
        by_id = {s.span_id: {**s.to_doc(), "children": []} for s in spans}
        root = None
        for span in spans:
            node = by_id[span.span_id]
            if span.parent and span.parent in by_id:
                by_id[span.parent]["children"].append(node)
            else:
                root = node
        return root
