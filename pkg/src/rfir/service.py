"""Session-based interactive retrieval service over a single live database.

One store serves both retrieval rounds. The query item itself, and (by
default) every item the user already rated, are excluded from the refined
results. Sessions live in memory; an optional append-only JSONL transcript
makes runs replayable.
"""

from __future__ import annotations

import enum
import io
import json
import threading
import time
import uuid
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pydantic

from .engine import (
    FailureSignal,
    FeedbackSet,
    RankedList,
    build_classifier,
    knn_retrieve,
    refined_retrieve,
)
from .errors import RfirError
from .store import FeatureStore, LabeledCorpus, check_pairing

DEFAULT_M = 10  # realistic feedback size for a live user


class SessionState(str, enum.Enum):
    CREATED = "Created"
    FIRST_RETURNED = "FirstReturned"
    FEEDBACK_RECEIVED = "FeedbackReceived"
    REFINED = "Refined"


_ORDER = list(SessionState)


@dataclass
class Session:
    session_id: str
    query_id: Optional[str]
    query_vector: np.ndarray
    m: int
    state: SessionState
    first_results: RankedList
    feedback: Optional[FeedbackSet] = None
    refined_results: Optional[RankedList] = None
    control_results: Optional[RankedList] = None
    failed: bool = False
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def advance(self, new_state: SessionState) -> None:
        if _ORDER.index(new_state) <= _ORDER.index(self.state):
            raise WrongState(
                f"cannot move from {self.state.value} to {new_state.value}"
            )
        self.state = new_state
        self.updated_at = time.time()


class UnknownItem(RfirError):
    pass


class WrongState(RfirError):
    pass


class LengthMismatch(RfirError):
    pass


class NotFound(RfirError):
    pass


class SessionEngine:
    """Live retrieval sessions over a paired store + corpus."""

    def __init__(
        self,
        store: FeatureStore,
        corpus: LabeledCorpus,
        m_default: int = DEFAULT_M,
        rate_once: bool = True,
        transcript_path: str | Path | None = None,
    ):
        check_pairing(store, corpus)
        self.store = store
        self.corpus = corpus
        self.m_default = m_default
        self.rate_once = rate_once
        self.transcript_path = Path(transcript_path) if transcript_path else None
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- transcript -----------------------------------------------------------

    def _log(self, event: dict) -> None:
        if self.transcript_path is None:
            return
        with open(self.transcript_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()

    # -- operations -----------------------------------------------------------

    def create_session(
        self,
        query_id: str | None = None,
        vector=None,
        m: int | None = None,
        session_id: str | None = None,
    ) -> Session:
        if (query_id is None) == (vector is None):
            raise ValueError("provide exactly one of query_id or vector")
        m = m or self.m_default
        if query_id is not None:
            if query_id not in self.store:
                raise UnknownItem(f"unknown item id {query_id!r}")
            u = self.store.vector(query_id)
            exclude = {query_id}
        else:
            u = np.asarray(vector, dtype=np.float64)
            exclude = set()
        first = knn_retrieve(u, m, self.store, exclude=exclude)
        session = Session(
            session_id=session_id or uuid.uuid4().hex,
            query_id=query_id,
            query_vector=np.asarray(u, dtype=np.float64),
            m=m,
            state=SessionState.FIRST_RETURNED,
            first_results=first,
        )
        with self._registry_lock:
            self._sessions[session.session_id] = session
        self._log(
            {
                "event": "create",
                "session_id": session.session_id,
                "query_id": query_id,
                "vector": None if query_id is not None else list(map(float, u)),
                "m": m,
            }
        )
        return session

    def submit_feedback(self, session_id: str, bits) -> Session:
        session = self.get_session(session_id)
        with session.lock:
            if session.state is not SessionState.FIRST_RETURNED:
                raise WrongState(f"session is in state {session.state.value}")
            bits = list(bits)
            if len(bits) != len(session.first_results):
                raise LengthMismatch(
                    f"{len(bits)} bits for {len(session.first_results)} results"
                )
            session.feedback = FeedbackSet.from_ranked(
                session.first_results, self.store, bits
            )
            session.advance(SessionState.FEEDBACK_RECEIVED)

            exclude = set()
            if session.query_id is not None:
                exclude.add(session.query_id)
            if self.rate_once:
                exclude.update(session.first_results.ids())
            clf = build_classifier(session.feedback)
            k = min(session.m, len(self.store) - len(exclude))
            if k >= 1:
                refined = refined_retrieve(
                    session.query_vector,
                    k,
                    len(self.store),
                    self.store,
                    clf,
                    exclude=exclude,
                )
                control = knn_retrieve(
                    session.query_vector, k, self.store, exclude=exclude
                )
            else:
                refined = FailureSignal(reason="no unrated items left")
                control = RankedList(entries=())
            if isinstance(refined, FailureSignal):
                session.failed = True
                session.refined_results = None
            else:
                session.refined_results = refined
            session.control_results = control
            session.advance(SessionState.REFINED)
        self._log({"event": "feedback", "session_id": session_id, "bits": bits})
        return session

    def get_session(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFound(f"no session {session_id!r}")
        return session


def replay_transcript(
    path: str | Path, store: FeatureStore, corpus: LabeledCorpus, **engine_kwargs
) -> dict[str, dict]:
    """Re-execute a transcript on a fresh engine; returns result ids per session."""
    engine = SessionEngine(store, corpus, **engine_kwargs)
    results: dict[str, dict] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            event = json.loads(line)
            if event["event"] == "create":
                session = engine.create_session(
                    query_id=event.get("query_id"),
                    vector=event.get("vector"),
                    m=event.get("m"),
                    session_id=event["session_id"],
                )
                results[session.session_id] = {
                    "first": session.first_results.ids()
                }
            elif event["event"] == "feedback":
                session = engine.submit_feedback(event["session_id"], event["bits"])
                entry = results[session.session_id]
                entry["failure"] = session.failed
                entry["refined"] = (
                    None if session.failed else session.refined_results.ids()
                )
    return results


# --- HTTP layer --------------------------------------------------------------


def _placeholder_png(item_id: str, labels: list[str]) -> bytes:
    from PIL import Image, ImageDraw

    import zlib

    digest = zlib.crc32(item_id.encode())
    color = (64 + digest % 128, 64 + (digest // 128) % 128, 64 + (digest // 16384) % 128)
    img = Image.new("RGB", (224, 224), color)
    draw = ImageDraw.Draw(img)
    draw.text((8, 96), item_id, fill=(255, 255, 255))
    draw.text((8, 120), ", ".join(sorted(labels)[:4]), fill=(230, 230, 230))
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


class CreateSessionBody(pydantic.BaseModel):
    query_id: Optional[str] = None
    vector: Optional[list[float]] = None
    m: Optional[int] = None


class FeedbackBody(pydantic.BaseModel):
    bits: list[int]


def create_app(engine: SessionEngine, static_dir: str | Path | None = None):
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import Response

    app = FastAPI(title="rfir", version="0.1.0")

    def _entry_payload(e) -> dict:
        item = engine.corpus[e.item_id]
        return {
            "id": e.item_id,
            "score": e.score,
            "image_url": f"/api/items/{e.item_id}/image",
            "labels": sorted(item.labels),
        }

    def _session_payload(session: Session) -> dict:
        payload = {
            "session_id": session.session_id,
            "state": session.state.value,
            "query_id": session.query_id,
            "m": session.m,
            "results": [_entry_payload(e) for e in session.first_results],
            "created_at": session.created_at,
            "updated_at": session.updated_at,
        }
        if session.state is SessionState.REFINED:
            payload["failure"] = session.failed
            payload["refined"] = (
                None
                if session.failed
                else [_entry_payload(e) for e in session.refined_results]
            )
            payload["control"] = [
                _entry_payload(e) for e in session.control_results
            ]
        return payload

    @app.post("/api/sessions", status_code=201)
    def post_session(body: CreateSessionBody):
        try:
            session = engine.create_session(
                query_id=body.query_id, vector=body.vector, m=body.m
            )
        except UnknownItem as exc:
            raise HTTPException(404, str(exc))
        except (RfirError, ValueError) as exc:
            raise HTTPException(400, str(exc))
        return {
            "session_id": session.session_id,
            "results": [_entry_payload(e) for e in session.first_results],
        }

    @app.post("/api/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, body: FeedbackBody):
        try:
            session = engine.submit_feedback(session_id, body.bits)
        except NotFound as exc:
            raise HTTPException(404, str(exc))
        except WrongState as exc:
            raise HTTPException(409, str(exc))
        except (RfirError, ValueError) as exc:
            raise HTTPException(400, str(exc))
        if session.failed:
            return {"failure": True, "control": [
                _entry_payload(e) for e in session.control_results
            ]}
        return {
            "results": [_entry_payload(e) for e in session.refined_results],
            "control": [_entry_payload(e) for e in session.control_results],
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            session = engine.get_session(session_id)
        except NotFound as exc:
            raise HTTPException(404, str(exc))
        return _session_payload(session)

    @app.get("/api/items/{item_id}/image")
    def get_image(item_id: str):
        if item_id not in engine.corpus:
            raise HTTPException(404, f"unknown item {item_id!r}")
        item = engine.corpus[item_id]
        if item.image_uri:
            path = Path(item.image_uri)
            if path.exists():
                suffix = path.suffix.lower().lstrip(".") or "octet-stream"
                media = f"image/{'jpeg' if suffix in ('jpg', 'jpeg') else suffix}"
                return Response(path.read_bytes(), media_type=media)
        return Response(
            _placeholder_png(item_id, sorted(item.labels)), media_type="image/png"
        )

    @app.get("/api/corpus/summary")
    def corpus_summary():
        histogram = Counter()
        for item in engine.corpus.items:
            histogram.update(item.labels)
        return {
            "count": len(engine.store),
            "dim": engine.store.dim,
            "label_histogram": dict(sorted(histogram.items())),
            "sample_ids": list(engine.store.ids[:24]),
        }

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
