"""User-scoped hybrid memory: semantic records plus an entity graph.

Saving takes two paths. Path 1 asks the model to distill the content into
add/update/delete operations on distilled records and entity edges; path 2
always stores the original content verbatim with no model involvement, so
nothing is ever lost when the model misbehaves or is unavailable. Every
record and edge belongs to exactly one user id and is invisible to others.
"""

from __future__ import annotations

import json
import logging
import sqlite3
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..clockutil import Clock, iso
from ..errors import ModelUnavailableError, NotFoundError, PreconditionError
from ..models import embedder
from .distill import DistillOutcome

logger = logging.getLogger(__name__)

FUZZY_ENTITY_THRESHOLD = 0.6


@dataclass
class MemoryRecord:
    record_id: str
    user_id: str
    kind: str  # "distilled" | "verbatim"
    text: str
    embedding: list[float]
    created_at: str
    source_session: str | None = None

    def to_doc(self, with_embedding: bool = False) -> dict:
        doc = {
            "record_id": self.record_id,
            "user_id": self.user_id,
            "kind": self.kind,
            "text": self.text,
            "created_at": self.created_at,
            "source_session": self.source_session,
        }
        if with_embedding:
            doc["embedding"] = self.embedding
        return doc


@dataclass
class EntityEdge:
    user_id: str
    subject: str
    relation: str
    object: str
    provenance: str

    def to_doc(self) -> dict:
        return {
            "user_id": self.user_id,
            "subject": self.subject,
            "relation": self.relation,
            "object": self.object,
            "provenance": self.provenance,
        }


class MemoryStore:
    def __init__(
        self,
        path: str | Path,
        embed: Callable[[list[str]], list] | None = None,
        distiller: Callable[[str, str], DistillOutcome] | None = None,
        clock: Clock | None = None,
    ):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.embed = embed or (lambda texts: [embedder.hash_embed(t) for t in texts])
        self.distiller = distiller
        self.clock = clock or Clock()
        self._user_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        with self._connect() as conn:
            conn.execute(
                "CREATE TABLE IF NOT EXISTS records ("
                " record_id TEXT PRIMARY KEY, user_id TEXT NOT NULL,"
                " kind TEXT NOT NULL, text TEXT NOT NULL,"
                " embedding TEXT NOT NULL, created_at TEXT NOT NULL,"
                " source_session TEXT)"
            )
            conn.execute(
                "CREATE TABLE IF NOT EXISTS edges ("
                " user_id TEXT NOT NULL, subject TEXT NOT NULL,"
                " relation TEXT NOT NULL, object TEXT NOT NULL,"
                " provenance TEXT NOT NULL)"
            )
            conn.execute(
                "CREATE TABLE IF NOT EXISTS counters (name TEXT PRIMARY KEY,"
                " value INTEGER NOT NULL)"
            )

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.path)
        conn.execute("PRAGMA journal_mode=WAL")
        return conn

    def _lock_for(self, user_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._user_locks.setdefault(user_id, threading.Lock())

    def _next_id(self, conn: sqlite3.Connection) -> str:
        conn.execute(
            "INSERT INTO counters VALUES ('record', 1)"
            " ON CONFLICT(name) DO UPDATE SET value = value + 1"
        )
        (value,) = conn.execute(
            "SELECT value FROM counters WHERE name='record'"
        ).fetchone()
        return f"m-{value:06d}"

    # -- writes ---------------------------------------------------------------

    def save(self, user_id: str, content: str,
             source_session: str | None = None) -> dict:
        """Dual-path save; returns a report of everything that happened."""
        if not content:
            raise PreconditionError("content must be non-empty")
        with self._lock_for(user_id):
            report: dict = {"distilled_ops": [], "edges_added": 0,
                            "warnings": []}
            # Path 2 first: verbatim preservation is unconditional.
            verbatim_id = self._insert_record(user_id, "verbatim", content,
                                              source_session)
            report["verbatim_record_id"] = verbatim_id
            # Path 1: model-distilled operations.
            if self.distiller is not None:
                try:
                    outcome = self.distiller(user_id, content)
                except ModelUnavailableError as exc:
                    report["warnings"].append(
                        f"distillation skipped: {exc.message}")
                    return report
                except Exception as exc:
                    report["warnings"].append(f"distillation failed: {exc}")
                    return report
                report["distilled_ops"] = self._apply_ops(
                    user_id, outcome, verbatim_id, source_session)
                report["edges_added"] = len(outcome.edges)
            return report

    def _insert_record(self, user_id: str, kind: str, text: str,
                       source_session: str | None,
                       record_id: str | None = None) -> str:
        (vec,) = self.embed([text])
        with self._connect() as conn:
            rid = record_id or self._next_id(conn)
            conn.execute(
                "INSERT OR REPLACE INTO records VALUES (?,?,?,?,?,?,?)",
                (rid, user_id, kind, text,
                 json.dumps([float(x) for x in vec]),
                 iso(self.clock.now()), source_session),
            )
        return rid

    def _apply_ops(self, user_id: str, outcome: DistillOutcome,
                   provenance: str, source_session: str | None) -> list[dict]:
        applied = []
        with self._connect() as conn:
            for op in outcome.ops:
                if op.action == "add":
                    rid = self._insert_record(user_id, "distilled", op.text,
                                              source_session)
                    applied.append({"action": "add", "record_id": rid,
                                    "text": op.text})
                elif op.action == "update" and op.record_id:
                    row = conn.execute(
                        "SELECT user_id FROM records WHERE record_id=?",
                        (op.record_id,),
                    ).fetchone()
                    if row and row[0] == user_id:
                        self._insert_record(user_id, "distilled", op.text,
                                            source_session,
                                            record_id=op.record_id)
                        applied.append({"action": "update",
                                        "record_id": op.record_id,
                                        "text": op.text})
                elif op.action == "delete" and op.record_id:
                    conn.execute(
                        "DELETE FROM records WHERE record_id=? AND user_id=?"
                        " AND kind='distilled'",
                        (op.record_id, user_id),
                    )
                    applied.append({"action": "delete",
                                    "record_id": op.record_id})
            for edge in outcome.edges:
                if not edge.get("subject") or not edge.get("object"):
                    continue
                conn.execute(
                    "INSERT INTO edges VALUES (?,?,?,?,?)",
                    (user_id, edge["subject"], edge.get("relation", "related-to"),
                     edge["object"], provenance),
                )
        return applied

    # -- reads ----------------------------------------------------------------

    def fetch(self, user_id: str, record_id: str) -> MemoryRecord:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT record_id, user_id, kind, text, embedding, created_at,"
                " source_session FROM records WHERE record_id=? AND user_id=?",
                (record_id, user_id),
            ).fetchone()
        if row is None:
            raise NotFoundError(f"no record {record_id} for this user")
        return MemoryRecord(row[0], row[1], row[2], row[3],
                            json.loads(row[4]), row[5], row[6])

    def _user_records(self, user_id: str) -> list[MemoryRecord]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT record_id, user_id, kind, text, embedding, created_at,"
                " source_session FROM records WHERE user_id=?"
                " ORDER BY record_id",
                (user_id,),
            ).fetchall()
        return [MemoryRecord(r[0], r[1], r[2], r[3], json.loads(r[4]), r[5], r[6])
                for r in rows]

    def _user_edges(self, user_id: str) -> list[EntityEdge]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT user_id, subject, relation, object, provenance"
                " FROM edges WHERE user_id=?",
                (user_id,),
            ).fetchall()
        return [EntityEdge(*r) for r in rows]

    def search(self, user_id: str, query: str, limit: int = 5) -> dict:
        """Semantic hits plus entity edges touching query entities."""
        if limit < 1:
            raise PreconditionError("limit must be >= 1")
        (qv,) = self.embed([query])
        qv = np.asarray(qv, dtype=np.float64)
        scored = []
        for record in self._user_records(user_id):
            score = embedder.cosine(qv, np.asarray(record.embedding))
            scored.append((score, record))
        scored.sort(key=lambda item: (-item[0], item[1].record_id))
        semantic = [
            {**record.to_doc(), "score": round(score, 6)}
            for score, record in scored[:limit]
        ]
        graph_hits = [e.to_doc() for e in self._user_edges(user_id)
                      if self._edge_matches(e, query)]
        return {"semantic": semantic, "graph": graph_hits}

    @staticmethod
    def _edge_matches(edge: EntityEdge, query: str) -> bool:
        from ..codeintel.introspect import similarity

        q = query.lower()
        tokens = [t for t in q.replace(",", " ").split() if t]
        for endpoint in (edge.subject, edge.object):
            e = endpoint.lower()
            if e in q:
                return True
            for token in tokens:
                if similarity(e, token) >= FUZZY_ENTITY_THRESHOLD:
                    return True
        return False

    # -- portability ------------------------------------------------------------

    def export_user(self, user_id: str) -> dict:
        return {
            "user_id": user_id,
            "records": [r.to_doc(with_embedding=True)
                        for r in self._user_records(user_id)],
            "edges": [e.to_doc() for e in self._user_edges(user_id)],
        }

    def import_user(self, doc: dict) -> int:
        user_id = doc["user_id"]
        count = 0
        with self._lock_for(user_id), self._connect() as conn:
            for rec in doc.get("records", []):
                embedding = rec.get("embedding")
                if embedding is None:
                    (embedding,) = self.embed([rec["text"]])
                    embedding = [float(x) for x in embedding]
                conn.execute(
                    "INSERT OR REPLACE INTO records VALUES (?,?,?,?,?,?,?)",
                    (rec["record_id"], user_id, rec["kind"], rec["text"],
                     json.dumps(embedding), rec["created_at"],
                     rec.get("source_session")),
                )
                count += 1
            for edge in doc.get("edges", []):
                conn.execute(
                    "INSERT INTO edges VALUES (?,?,?,?,?)",
                    (user_id, edge["subject"], edge["relation"],
                     edge["object"], edge["provenance"]),
                )
        return count
