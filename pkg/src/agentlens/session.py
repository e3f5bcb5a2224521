"""Session-log ingestion: parse an agent's completed edit session and replay
it into a canonical modification timeline.

The log is one JSON document (see README for the format).  The repository at
``repo_root`` is expected in its pre-session state; replaying the session's
diffs against it yields the post-session contents and verifies every hunk.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from agentlens.diffs import ChangeHunk, apply_hunks, hunks_to_text, make_unified_diff, parse_unified_diff
from agentlens.errors import (
    ApplyError,
    BinaryFileError,
    ParseError,
    SecurityError,
    ValidationError,
)
from agentlens.identifiers import stoplist_for, tokenize_lines

EVENT_KINDS = ("file_edit", "file_create", "file_delete", "tool_note")
_FILE_KINDS = ("file_edit", "file_create", "file_delete")


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    path: str | None = None
    diff: str | None = None
    note: str | None = None


@dataclass(frozen=True)
class AgentSession:
    session_id: str
    task_prompt: str
    repo_root: str
    events: tuple[SessionEvent, ...]
    created_at: str | None = None


@dataclass(frozen=True)
class FileModification:
    """Net effect of a session on one file, in first-touch order."""

    path: str
    kind: str  # created | modified | deleted
    hunks: tuple[ChangeHunk, ...]
    order_index: int
    post_symbols: tuple[str, ...] = ()

    @property
    def added_line_count(self) -> int:
        return sum(len(h.added_lines) for h in self.hunks)

    @property
    def removed_line_count(self) -> int:
        return sum(len(h.removed_lines) for h in self.hunks)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "kind": self.kind,
            "order_index": self.order_index,
            "post_symbols": list(self.post_symbols),
            "added_lines": self.added_line_count,
            "removed_lines": self.removed_line_count,
            "diff": hunks_to_text(list(self.hunks)),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FileModification":
        return cls(
            path=doc["path"],
            kind=doc["kind"],
            hunks=tuple(parse_unified_diff(doc["diff"])),
            order_index=doc["order_index"],
            post_symbols=tuple(doc["post_symbols"]),
        )


@dataclass
class SessionReplay:
    """Replayed session: the timeline plus pre/post contents of touched files."""

    session: AgentSession
    timeline: list[FileModification]
    pre_files: dict[str, str] = field(default_factory=dict)
    post_files: dict[str, str] = field(default_factory=dict)
    existed_before: set[str] = field(default_factory=set)


def _validate_relative_path(path: str) -> str:
    if not path:
        raise ValidationError("event path is empty")
    if "\\" in path:
        raise ValidationError(f"event path uses backslashes: {path!r}")
    if path.startswith("/"):
        raise SecurityError(f"event path is absolute: {path!r}")
    parts = path.split("/")
    if ".." in parts:
        raise SecurityError(f"event path escapes the repository root: {path!r}")
    if any(part in ("", ".") for part in parts):
        raise ValidationError(f"event path is not normalized: {path!r}")
    return path


def parse_session_log(raw: bytes) -> AgentSession:
    """Parse and validate a session-log document.

    Events come back sorted by seq.  Duplicate seq numbers raise
    ValidationError; paths escaping the repository root raise SecurityError.
    """
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"session log is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"session log is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("session log must be a JSON object")
    for key in ("session_id", "task_prompt", "repo_root", "events"):
        if key not in doc:
            raise ValidationError(f"session log missing required field {key!r}")
    if not isinstance(doc["session_id"], str) or not doc["session_id"]:
        raise ValidationError("session_id must be a non-empty string")
    if not isinstance(doc["events"], list):
        raise ValidationError("events must be a list")

    events: list[SessionEvent] = []
    seen_seq: set[int] = set()
    for raw_event in doc["events"]:
        if not isinstance(raw_event, dict):
            raise ValidationError("each event must be a JSON object")
        seq = raw_event.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
            raise ValidationError(f"event seq must be an integer >= 0, got {seq!r}")
        if seq in seen_seq:
            raise ValidationError(f"duplicate event seq {seq}")
        seen_seq.add(seq)
        kind = raw_event.get("kind")
        if kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {kind!r}")
        path = raw_event.get("path")
        diff = raw_event.get("diff")
        note = raw_event.get("note")
        if kind in _FILE_KINDS:
            if not isinstance(path, str):
                raise ValidationError(f"event seq={seq}: {kind} requires a path")
            path = _validate_relative_path(path)
            if not isinstance(diff, str):
                raise ValidationError(f"event seq={seq}: {kind} requires a diff")
        else:
            path = None
            diff = None
            if note is not None and not isinstance(note, str):
                raise ValidationError(f"event seq={seq}: note must be text")
        events.append(SessionEvent(seq=seq, kind=kind, path=path, diff=diff, note=note))

    events.sort(key=lambda e: e.seq)
    created_at = doc.get("created_at")
    if created_at is not None and not isinstance(created_at, str):
        raise ValidationError("created_at must be a string timestamp")
    return AgentSession(
        session_id=doc["session_id"],
        task_prompt=str(doc["task_prompt"]),
        repo_root=str(doc["repo_root"]),
        events=tuple(events),
        created_at=created_at,
    )


def _read_pre_image(root: Path, rel_path: str) -> str | None:
    """Pre-session contents of a file, or None when it does not exist."""
    target = root / rel_path
    if not target.is_file():
        return None
    raw = target.read_bytes()
    if b"\x00" in raw:
        raise BinaryFileError(f"{rel_path} is binary; sessions are line-oriented")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BinaryFileError(f"{rel_path} is not UTF-8 text: {exc}") from exc


def replay_session(session: AgentSession, repo_root: str | Path | None = None) -> SessionReplay:
    """Replay every event against the pre-session tree.

    Produces one FileModification per distinct path in first-touch order;
    all edits to the same path are composed and re-diffed against the
    pre-image, so merged hunks are canonical (sorted, non-overlapping,
    three context lines).
    """
    root = Path(repo_root) if repo_root is not None else Path(session.repo_root)
    touch_order: list[str] = []
    first_kind: dict[str, str] = {}
    last_kind: dict[str, str] = {}
    pre_files: dict[str, str] = {}
    current: dict[str, str] = {}
    existed_before: set[str] = set()

    for event in session.events:
        if event.kind == "tool_note":
            continue
        path = event.path
        assert path is not None and event.diff is not None
        if path not in first_kind:
            touch_order.append(path)
            first_kind[path] = event.kind
            pre = _read_pre_image(root, path)
            if pre is not None:
                existed_before.add(path)
            if event.kind == "file_create":
                if pre is not None:
                    raise ValidationError(
                        f"file_create for {path!r} but the file already exists"
                    )
                pre = ""
            elif pre is None:
                raise ApplyError(
                    f"{event.kind} for {path!r} but no such file in the repository",
                    path=path,
                )
            pre_files[path] = pre
            current[path] = pre
        try:
            hunks = parse_unified_diff(event.diff)
        except ParseError as exc:
            raise ParseError(f"event seq={event.seq} ({path}): {exc}") from exc
        if event.kind == "file_create" and any(h.pre_len > 0 for h in hunks):
            raise ValidationError(
                f"event seq={event.seq}: file_create diff for {path!r} has a non-empty pre-image"
            )
        try:
            current[path] = apply_hunks(current[path], hunks)
        except ApplyError as exc:
            raise ApplyError(
                f"event seq={event.seq} ({path}): {exc}", path=path, hunk_index=exc.hunk_index
            ) from exc
        if event.kind == "file_delete" and current[path] != "":
            raise ValidationError(
                f"event seq={event.seq}: file_delete diff for {path!r} leaves a non-empty post-image"
            )
        last_kind[path] = event.kind

    timeline: list[FileModification] = []
    post_files: dict[str, str] = {}
    for order_index, path in enumerate(touch_order):
        pre = pre_files[path]
        post = current[path]
        post_files[path] = post
        if last_kind[path] == "file_delete":
            kind = "deleted"
        elif first_kind[path] == "file_create":
            kind = "created"
        else:
            kind = "modified"
        hunks = tuple(parse_unified_diff(make_unified_diff(pre, post)))
        timeline.append(
            FileModification(path=path, kind=kind, hunks=hunks, order_index=order_index)
        )
    return SessionReplay(
        session=session,
        timeline=timeline,
        pre_files=pre_files,
        post_files=post_files,
        existed_before=existed_before,
    )


def build_timeline(session: AgentSession, repo_root: str | Path | None = None) -> list[FileModification]:
    """Ordered modification timeline for a validated session."""
    return replay_session(session, repo_root).timeline


def extract_added_identifiers(mod: FileModification) -> Counter[str]:
    """Multiset of identifier tokens from the modification's added lines."""
    stoplist = stoplist_for(mod.path)
    added = [line for hunk in mod.hunks for line in hunk.added_lines]
    return tokenize_lines(added, stoplist)
