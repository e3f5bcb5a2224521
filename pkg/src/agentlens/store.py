"""File-backed session store.

One directory per session under the store root, holding append-only event
records plus the frozen analysis products.  All documents are canonical
JSON bytes written atomically, so a session re-read after restart serves
exactly the bytes it served before, and an interrupted write never leaves a
truncated document behind.

Layout:
    <store>/<session_id>/session.json    status + identifiers
    <store>/<session_id>/events.jsonl    append-only card/complete/error events
    <store>/<session_id>/level1.json     Level 1 document bytes
    <store>/<session_id>/index.json      serialized RepoIndex
    <store>/<session_id>/snapshot.json   {path: text} post-state file map
    <store>/<session_id>/timeline.json   modification timeline
    <store>/<session_id>/level2/<i>.json cached Level 2 documents
"""
from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from agentlens.backends import BackendConfig, make_backend
from agentlens.diffs import LineRange, split_lines
from agentlens.errors import LensError, NotFoundError, RangeError, ValidationError
from agentlens.pipeline import (
    SessionAnalysis,
    analyze_session,
    build_level1,
    level2_document,
)
from agentlens.repo_index import (
    EvidenceAnchor,
    index_from_dict,
    index_to_dict,
    resolve_anchor,
)
from agentlens.schemas import LEVEL1_SCHEMA, canonical_json, validation_errors
from agentlens.session import AgentSession, FileModification, parse_session_log

logger = logging.getLogger(__name__)

STATUS_INGESTING = "ingesting"
STATUS_LEVEL1_READY = "level1_ready"
STATUS_FAILED = "failed"


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


@dataclass
class _SessionState:
    session_id: str
    directory: Path
    status: str
    events: list[dict] = field(default_factory=list)
    condition: threading.Condition = field(default_factory=threading.Condition)
    analysis: SessionAnalysis | None = None
    level2_locks: dict[int, threading.Lock] = field(default_factory=dict)
    card_count: int = 0


class SessionStore:
    """Owns session lifecycles: ingestion, streaming, lazy Level 2, slices."""

    def __init__(self, store_dir: str | Path, backend_config: BackendConfig | None = None):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.backend_config = backend_config or BackendConfig()
        self._lock = threading.Lock()
        self._sessions: dict[str, _SessionState] = {}
        self._load_existing()

    # -- lifecycle -----------------------------------------------------------

    def _load_existing(self) -> None:
        for entry in sorted(self.store_dir.iterdir()) if self.store_dir.is_dir() else []:
            meta_path = entry / "session.json"
            if not meta_path.is_file():
                continue
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                logger.warning("skipping corrupt session metadata in %s", entry)
                continue
            state = _SessionState(
                session_id=meta["session_id"], directory=entry, status=meta["status"]
            )
            events_path = entry / "events.jsonl"
            if events_path.is_file():
                for line in events_path.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        event = json.loads(line)
                        state.events.append(event)
                        if event["event"] == "card":
                            state.card_count += 1
            if state.status == STATUS_INGESTING:
                # The worker died with the process; terminate the stream cleanly.
                state.status = STATUS_FAILED
                state.events.append(
                    {
                        "event": "error",
                        "data": {
                            "type": "IngestInterrupted",
                            "message": "ingestion did not complete before restart",
                        },
                    }
                )
            self._sessions[state.session_id] = state

    def create_session(self, log_bytes: bytes, repo_root: str | Path) -> str:
        """Validate the log, register the session, and start ingestion.

        Parsing errors surface synchronously; ingestion and Level 1
        generation run on a worker thread that emits stream events.
        """
        session = parse_session_log(log_bytes)
        root = Path(repo_root)
        if not root.is_dir():
            raise ValidationError(f"repository root {root} is not a readable directory")
        with self._lock:
            if session.session_id in self._sessions:
                raise ValidationError(f"session {session.session_id!r} already exists")
            directory = self.store_dir / session.session_id
            directory.mkdir(parents=True, exist_ok=True)
            state = _SessionState(
                session_id=session.session_id, directory=directory, status=STATUS_INGESTING
            )
            self._sessions[session.session_id] = state
        self._write_meta(state, snapshot_id=None, task_prompt=session.task_prompt)
        worker = threading.Thread(
            target=self._ingest, args=(state, session, root), daemon=True
        )
        worker.start()
        return session.session_id

    def _write_meta(
        self, state: _SessionState, snapshot_id: str | None, task_prompt: str | None = None
    ) -> None:
        meta = {
            "session_id": state.session_id,
            "status": state.status,
            "snapshot_id": snapshot_id,
        }
        if task_prompt is not None:
            meta["task_prompt"] = task_prompt
        existing = state.directory / "session.json"
        if existing.is_file() and task_prompt is None:
            previous = json.loads(existing.read_text(encoding="utf-8"))
            meta["task_prompt"] = previous.get("task_prompt", "")
            if snapshot_id is None:
                meta["snapshot_id"] = previous.get("snapshot_id")
        _write_atomic(existing, canonical_json(meta))

    def _append_event(self, state: _SessionState, event: dict) -> None:
        record = canonical_json(event) + b"\n"
        with open(state.directory / "events.jsonl", "ab") as handle:
            handle.write(record)
        with state.condition:
            state.events.append(event)
            if event["event"] == "card":
                state.card_count += 1
            state.condition.notify_all()

    def _ingest(self, state: _SessionState, session: AgentSession, root: Path) -> None:
        try:
            analysis = analyze_session(session, root)
            state.analysis = analysis
            self._persist_analysis(state, analysis)
            backend = make_backend(self.backend_config)
            explanation = build_level1(analysis, backend)
            for card in explanation.cards:
                self._append_event(state, {"event": "card", "data": card.to_dict()})
            document = explanation.to_document(session.session_id, analysis.snapshot_id)
            errors = validation_errors(document, LEVEL1_SCHEMA)
            if errors:
                raise ValidationError("level 1 document failed schema validation: " + errors[0])
            _write_atomic(state.directory / "level1.json", canonical_json(document))
            with state.condition:
                state.status = STATUS_LEVEL1_READY
            self._write_meta(state, snapshot_id=analysis.snapshot_id)
            self._append_event(state, {"event": "complete", "data": document})
        except Exception as exc:  # ingest failures become stream error events
            logger.exception("ingestion failed for session %s", state.session_id)
            with state.condition:
                state.status = STATUS_FAILED
            self._write_meta(state, snapshot_id=None)
            payload = exc.to_dict() if isinstance(exc, LensError) else {
                "type": type(exc).__name__,
                "message": str(exc),
            }
            self._append_event(state, {"event": "error", "data": payload})

    def _persist_analysis(self, state: _SessionState, analysis: SessionAnalysis) -> None:
        _write_atomic(
            state.directory / "index.json", canonical_json(index_to_dict(analysis.index))
        )
        _write_atomic(state.directory / "snapshot.json", canonical_json(analysis.files))
        _write_atomic(
            state.directory / "timeline.json",
            canonical_json([mod.to_dict() for mod in analysis.timeline]),
        )

    # -- reads -----------------------------------------------------------------

    def _state(self, session_id: str) -> _SessionState:
        with self._lock:
            state = self._sessions.get(session_id)
        if state is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return state

    def session_info(self, session_id: str) -> dict:
        state = self._state(session_id)
        meta = json.loads((state.directory / "session.json").read_text(encoding="utf-8"))
        with state.condition:
            meta["status"] = state.status
            meta["cards"] = state.card_count
        return meta

    def level1_bytes(self, session_id: str) -> bytes:
        state = self._state(session_id)
        path = state.directory / "level1.json"
        if not path.is_file():
            raise NotFoundError(f"session {session_id!r} has no Level 1 document yet")
        return path.read_bytes()

    def stream_events(self, session_id: str, poll_timeout: float = 0.5):
        """Yield events in order, replaying history then following live ones."""
        state = self._state(session_id)
        cursor = 0
        while True:
            with state.condition:
                while cursor >= len(state.events):
                    # Status flips terminal before the final event lands, so
                    # only stop once a terminal event has been drained too.
                    terminal_drained = state.status in (
                        STATUS_LEVEL1_READY,
                        STATUS_FAILED,
                    ) and (
                        not state.events
                        or state.events[-1]["event"] in ("complete", "error")
                    )
                    if terminal_drained:
                        return
                    state.condition.wait(timeout=poll_timeout)
                event = state.events[cursor]
            cursor += 1
            yield event
            if event["event"] in ("complete", "error"):
                return

    # -- analysis reloading -------------------------------------------------------

    def _load_analysis(self, state: _SessionState) -> SessionAnalysis:
        if state.analysis is not None:
            return state.analysis
        directory = state.directory
        for required in ("index.json", "snapshot.json", "timeline.json"):
            if not (directory / required).is_file():
                raise NotFoundError(
                    f"session {state.session_id!r} has no persisted analysis"
                )
        files = json.loads((directory / "snapshot.json").read_text(encoding="utf-8"))
        index = index_from_dict(
            json.loads((directory / "index.json").read_text(encoding="utf-8")),
            contents=lambda path, _files=files: _files[path],
        )
        timeline = [
            FileModification.from_dict(doc)
            for doc in json.loads((directory / "timeline.json").read_text(encoding="utf-8"))
        ]
        meta = json.loads((directory / "session.json").read_text(encoding="utf-8"))
        session = AgentSession(
            session_id=state.session_id,
            task_prompt=meta.get("task_prompt", ""),
            repo_root="",
            events=(),
        )
        analysis = SessionAnalysis(session=session, timeline=timeline, index=index, files=files)
        state.analysis = analysis
        return analysis

    # -- level 2 -----------------------------------------------------------------

    def level2_bytes(self, session_id: str, order_index: int) -> bytes:
        """Compute-on-first-request, then serve identical cached bytes.

        Computation per (session, index) is single-flight: concurrent first
        requests coalesce into one ranking pass.
        """
        state = self._state(session_id)
        with state.condition:
            if state.status == STATUS_INGESTING:
                raise ValidationError(f"session {session_id!r} is still ingesting")
            if state.status == STATUS_FAILED:
                raise ValidationError(f"session {session_id!r} failed ingestion")
            if not 0 <= order_index < state.card_count:
                raise RangeError(
                    f"change index {order_index} out of range; session has "
                    f"{state.card_count} modification(s)"
                )
            lock = state.level2_locks.setdefault(order_index, threading.Lock())
        cache_path = state.directory / "level2" / f"{order_index}.json"
        with lock:
            if cache_path.is_file():
                return cache_path.read_bytes()
            analysis = self._load_analysis(state)
            backend = make_backend(self.backend_config)
            document = level2_document(
                analysis,
                order_index,
                backend,
                budget=self.backend_config.budget,
                max_repairs=self.backend_config.max_repairs,
            )
            data = canonical_json(document)
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            _write_atomic(cache_path, data)
            return data

    # -- artifact slices ------------------------------------------------------------

    def artifact_slice(self, session_id: str, artifact_id: str, start: int, end: int) -> dict:
        state = self._state(session_id)
        analysis = self._load_analysis(state)
        if start < 1 or end < start:
            raise RangeError(f"invalid slice range {start}..{end}")
        anchor = EvidenceAnchor(artifact_id=artifact_id, span=LineRange(start, end))
        text = resolve_anchor(analysis.index, anchor)
        record = analysis.index.artifact_by_id(artifact_id)
        assert record is not None
        return {
            "artifact_id": artifact_id,
            "path": record.path,
            "start": start,
            "end": end,
            "lines": [line.rstrip("\n") for line in split_lines(text)],
        }
