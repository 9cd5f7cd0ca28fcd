"""Three-annotator labeling sessions: consensus, adjudication, agreement.

State is persisted as an append-only JSONL log per session; replaying the log
reconstructs the in-memory state exactly, so a crash between writes loses at
most the uncommitted record. ``close`` compacts the log by dropping
overwritten submissions.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..dataset import (
    NIL,
    Entity,
    Entry,
    entry_from_record,
    entry_to_record,
    load_kb,
    save_kb,
)
from ..errors import (
    AuthorizationError,
    ContractViolation,
    IncompleteSessionError,
    ValidationError,
)

PENDING = "Pending"
AGREED = "Agreed"
DISPUTED = "Disputed"
ADJUDICATED = "Adjudicated"

ANNOTATORS_PER_ENTRY = 3


@dataclass(frozen=True)
class AnnotationRecord:
    entry_id: str
    annotator_id: str
    choice: str  # entity id or NIL
    nil_pattern_choice: str | None = None
    timestamp: float = 0.0


@dataclass(frozen=True)
class ConsensusState:
    entry_id: str
    status: str
    answer: str | None = None
    nil_pattern: str | None = None


class AnnotationSession:
    def __init__(
        self,
        session_id: str,
        entries: list[Entry],
        annotator_ids: list[str],
        expert_id: str,
        kb: dict[str, Entity] | None = None,
        data_dir: str | Path | None = None,
    ):
        if len(annotator_ids) != ANNOTATORS_PER_ENTRY or len(set(annotator_ids)) != ANNOTATORS_PER_ENTRY:
            raise ContractViolation("exactly 3 distinct annotator ids are required")
        if expert_id in annotator_ids:
            raise ContractViolation("the expert cannot also be an annotator")
        self.session_id = session_id
        self.entries: dict[str, Entry] = {e.entry_id: e for e in entries}
        self.entry_order = sorted(self.entries)
        self.annotators = list(annotator_ids)
        self.expert = expert_id
        self.kb = kb or {}
        self.records: dict[str, dict[str, AnnotationRecord]] = {}
        self.adjudications: dict[str, AnnotationRecord] = {}
        self._lock = threading.Lock()
        self._log_fh = None
        self._dir = Path(data_dir) / session_id if data_dir is not None else None

    # -- persistence ------------------------------------------------------

    def persist(self) -> None:
        """Write session metadata and open the append-only log."""
        if self._dir is None:
            return
        self._dir.mkdir(parents=True, exist_ok=True)
        meta = {"session_id": self.session_id, "annotators": self.annotators, "expert": self.expert}
        (self._dir / "meta.json").write_text(json.dumps(meta), encoding="utf-8")
        with open(self._dir / "entries.jsonl", "w", encoding="utf-8") as fh:
            for eid in self.entry_order:
                fh.write(json.dumps(entry_to_record(self.entries[eid]), ensure_ascii=False) + "\n")
        save_kb(
            sorted(self.kb.values(), key=lambda e: e.entity_id), self._dir / "kb.jsonl"
        )
        self._log_fh = open(self._dir / "log.jsonl", "a", encoding="utf-8")

    @classmethod
    def open(cls, data_dir: str | Path, session_id: str) -> "AnnotationSession":
        sdir = Path(data_dir) / session_id
        meta = json.loads((sdir / "meta.json").read_text(encoding="utf-8"))
        entries = []
        with open(sdir / "entries.jsonl", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(entry_from_record(json.loads(line)))
        kb = load_kb(sdir / "kb.jsonl") if (sdir / "kb.jsonl").exists() else {}
        session = cls(session_id, entries, meta["annotators"], meta["expert"], kb, data_dir)
        log_path = sdir / "log.jsonl"
        if log_path.exists():
            with open(log_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        session._apply(json.loads(line))
        session._log_fh = open(log_path, "a", encoding="utf-8")
        return session

    def _append_log(self, event: dict) -> None:
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            self._log_fh.flush()

    def _apply(self, event: dict) -> None:
        record = AnnotationRecord(
            entry_id=event["entry_id"],
            annotator_id=event["annotator_id"],
            choice=event["choice"],
            nil_pattern_choice=event.get("nil_pattern"),
            timestamp=event.get("timestamp", 0.0),
        )
        if event["kind"] == "annotation":
            self.records.setdefault(record.entry_id, {})[record.annotator_id] = record
        else:
            self.adjudications[record.entry_id] = record
            self._write_back(record)

    def _write_back(self, record: AnnotationRecord) -> None:
        entry = self.entries[record.entry_id]
        entry.answer = record.choice
        entry.nil_pattern = record.nil_pattern_choice if record.choice == NIL else None

    def close(self) -> None:
        """Compact the log down to the surviving records and close it."""
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None
        if self._dir is None:
            return
        with open(self._dir / "log.jsonl", "w", encoding="utf-8") as fh:
            for eid in self.entry_order:
                for annotator in self.annotators:
                    rec = self.records.get(eid, {}).get(annotator)
                    if rec is not None:
                        fh.write(json.dumps(self._event("annotation", rec), ensure_ascii=False) + "\n")
            for eid in sorted(self.adjudications):
                fh.write(json.dumps(self._event("adjudication", self.adjudications[eid]), ensure_ascii=False) + "\n")

    @staticmethod
    def _event(kind: str, rec: AnnotationRecord) -> dict:
        return {
            "kind": kind,
            "entry_id": rec.entry_id,
            "annotator_id": rec.annotator_id,
            "choice": rec.choice,
            "nil_pattern": rec.nil_pattern_choice,
            "timestamp": rec.timestamp,
        }

    # -- annotation workflow ----------------------------------------------

    def _check_annotator(self, annotator_id: str) -> None:
        if annotator_id not in self.annotators:
            raise AuthorizationError(f"unknown annotator {annotator_id!r}")

    def next_task(self, annotator_id: str) -> Entry | None:
        """The lowest-id entry the annotator has not labeled yet, or None."""
        self._check_annotator(annotator_id)
        for eid in self.entry_order:
            if annotator_id not in self.records.get(eid, {}):
                return self.entries[eid]
        return None

    def _validate_choice(self, entry_id: str, choice: str, nil_pattern: str | None) -> None:
        if entry_id not in self.entries:
            raise ValidationError(f"unknown entry {entry_id!r}")
        entry = self.entries[entry_id]
        if choice == NIL:
            if nil_pattern is None:
                raise ValidationError("NIL choices require a nil_pattern")
        elif choice not in entry.candidates:
            raise ValidationError(f"choice {choice!r} is not a candidate of {entry_id}")

    def submit(self, record: AnnotationRecord) -> ConsensusState:
        """Store one annotator's choice (resubmission overwrites) and return
        the updated consensus for that entry."""
        with self._lock:
            self._check_annotator(record.annotator_id)
            self._validate_choice(record.entry_id, record.choice, record.nil_pattern_choice)
            if record.timestamp == 0.0:
                record = AnnotationRecord(
                    record.entry_id, record.annotator_id, record.choice,
                    record.nil_pattern_choice, time.time(),
                )
            self.records.setdefault(record.entry_id, {})[record.annotator_id] = record
            self._append_log(self._event("annotation", record))
            return self.consensus(record.entry_id)

    def consensus(self, entry_id: str) -> ConsensusState:
        if entry_id in self.adjudications:
            rec = self.adjudications[entry_id]
            return ConsensusState(entry_id, ADJUDICATED, rec.choice, rec.nil_pattern_choice)
        recs = self.records.get(entry_id, {})
        if len(recs) < ANNOTATORS_PER_ENTRY:
            return ConsensusState(entry_id, PENDING)
        choices = [recs[a].choice for a in self.annotators]
        if len(set(choices)) == 1:
            answer = choices[0]
            pattern = None
            if answer == NIL:
                votes = [recs[a].nil_pattern_choice for a in self.annotators]
                pattern = max(set(votes), key=votes.count)
            return ConsensusState(entry_id, AGREED, answer, pattern)
        return ConsensusState(entry_id, DISPUTED)

    def adjudicate(self, entry_id: str, expert_id: str, choice: str, nil_pattern: str | None = None) -> ConsensusState:
        with self._lock:
            if expert_id != self.expert:
                raise AuthorizationError(f"{expert_id!r} is not the session expert")
            state = self.consensus(entry_id)
            if state.status != DISPUTED:
                raise ContractViolation(f"entry {entry_id} is {state.status}, not Disputed")
            self._validate_choice(entry_id, choice, nil_pattern)
            rec = AnnotationRecord(entry_id, expert_id, choice, nil_pattern, time.time())
            self.adjudications[entry_id] = rec
            self._write_back(rec)
            self._append_log(self._event("adjudication", rec))
            return self.consensus(entry_id)

    def disputes(self) -> list[str]:
        return [eid for eid in self.entry_order if self.consensus(eid).status == DISPUTED]

    def progress(self) -> dict[str, int]:
        counts = {PENDING: 0, AGREED: 0, DISPUTED: 0, ADJUDICATED: 0}
        for eid in self.entry_order:
            counts[self.consensus(eid).status] += 1
        return {
            "pending": counts[PENDING],
            "agreed": counts[AGREED],
            "disputed": counts[DISPUTED],
            "adjudicated": counts[ADJUDICATED],
        }

    def agreement_rate(self) -> float:
        """Fraction of entries on which all three annotators agree.
        Adjudications do not enter this number."""
        missing = {
            eid: ANNOTATORS_PER_ENTRY - len(self.records.get(eid, {}))
            for eid in self.entry_order
            if len(self.records.get(eid, {})) < ANNOTATORS_PER_ENTRY
        }
        if missing:
            raise IncompleteSessionError(missing)
        if not self.entry_order:
            return 1.0
        unanimous = sum(
            1
            for eid in self.entry_order
            if len({self.records[eid][a].choice for a in self.annotators}) == 1
        )
        return unanimous / len(self.entry_order)

    def export_entries(self) -> list[Entry]:
        """Finalized entries: the unanimous choice when agreed, the expert
        choice when adjudicated. Unfinished entries are not exported."""
        out: list[Entry] = []
        for eid in self.entry_order:
            state = self.consensus(eid)
            if state.status not in (AGREED, ADJUDICATED):
                continue
            entry = self.entries[eid]
            entry.answer = state.answer
            entry.nil_pattern = state.nil_pattern if state.answer == NIL else None
            out.append(entry)
        return out
