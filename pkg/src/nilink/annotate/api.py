"""HTTP API over an annotation session, consumed by the browser UI."""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from ..dataset import NIL, Entry, entry_to_record
from ..errors import AuthorizationError, ContractViolation, IncompleteSessionError, ValidationError
from .store import AnnotationRecord, AnnotationSession, ConsensusState


class AnnotationIn(BaseModel):
    entry_id: str
    annotator_id: str
    choice: str
    nil_pattern: str | None = None


class AdjudicationIn(BaseModel):
    entry_id: str
    expert_id: str
    choice: str
    nil_pattern: str | None = None


def _candidate_cards(session: AnnotationSession, entry: Entry) -> list[dict]:
    cards = []
    for eid in entry.candidates:
        ent = session.kb.get(eid)
        cards.append(
            {
                "id": eid,
                "title": ent.title if ent else eid,
                "description": ent.description if ent else "",
                "url": ent.url if ent else "",
            }
        )
    return cards


def _task_payload(session: AnnotationSession, entry: Entry) -> dict:
    return {
        "done": False,
        "entry_id": entry.entry_id,
        "left": list(entry.context.left),
        "mention": list(entry.context.mention),
        "right": list(entry.context.right),
        "candidates": _candidate_cards(session, entry),
        "progress": session.progress(),
    }


def _consensus_payload(state: ConsensusState) -> dict:
    return {
        "entry_id": state.entry_id,
        "status": state.status,
        "answer": state.answer,
        "nil_pattern": state.nil_pattern,
    }


def create_app(session: AnnotationSession) -> FastAPI:
    app = FastAPI(title="nilink annotation service")

    def _session(session_id: str) -> AnnotationSession:
        if session_id != session.session_id:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.get("/api/session/{session_id}/next")
    def next_task(session_id: str, annotator: str = Query(...)):
        s = _session(session_id)
        try:
            entry = s.next_task(annotator)
        except AuthorizationError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        if entry is None:
            return {"done": True, "progress": s.progress()}
        return _task_payload(s, entry)

    @app.post("/api/session/{session_id}/annotation")
    def submit_annotation(session_id: str, body: AnnotationIn):
        s = _session(session_id)
        record = AnnotationRecord(body.entry_id, body.annotator_id, body.choice, body.nil_pattern)
        try:
            state = s.submit(record)
        except AuthorizationError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _consensus_payload(state)

    @app.get("/api/session/{session_id}/disputes")
    def disputes(session_id: str):
        s = _session(session_id)
        out = []
        for eid in s.disputes():
            entry = s.entries[eid]
            out.append(
                {
                    "entry_id": eid,
                    "left": list(entry.context.left),
                    "mention": list(entry.context.mention),
                    "right": list(entry.context.right),
                    "candidates": _candidate_cards(s, entry),
                    "choices": [
                        {
                            "annotator_id": a,
                            "choice": s.records[eid][a].choice,
                            "nil_pattern": s.records[eid][a].nil_pattern_choice,
                        }
                        for a in s.annotators
                        if a in s.records.get(eid, {})
                    ],
                }
            )
        return out

    @app.post("/api/session/{session_id}/adjudication")
    def adjudicate(session_id: str, body: AdjudicationIn):
        s = _session(session_id)
        try:
            state = s.adjudicate(body.entry_id, body.expert_id, body.choice, body.nil_pattern)
        except AuthorizationError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except ContractViolation as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _consensus_payload(state)

    @app.get("/api/session/{session_id}/progress")
    def progress(session_id: str):
        return _session(session_id).progress()

    @app.get("/api/session/{session_id}/agreement")
    def agreement(session_id: str):
        try:
            return {"agreement_rate": _session(session_id).agreement_rate()}
        except IncompleteSessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/api/session/{session_id}/export", response_class=PlainTextResponse)
    def export(session_id: str):
        s = _session(session_id)
        lines = [
            json.dumps(entry_to_record(e), ensure_ascii=False, separators=(",", ":"))
            for e in s.export_entries()
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    return app
