"""End-to-end orchestration: session log + repository -> explanations.

The repository on disk is the pre-session state.  Replaying the session's
diffs yields the post-session snapshot the explanations reference: modified
and created files carry their post-state contents, untouched files stay as
read, and deleted files keep their pre-image so evidence into removed code
remains resolvable.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from agentlens.backends import GenerationBackend
from agentlens.conventions import ConventionProfile, profile_repository
from agentlens.engine import (
    Level1Explanation,
    Level2Explanation,
    generate_level1,
    generate_level2,
)
from agentlens.errors import RangeError, ValidationError
from agentlens.repo_index import (
    ArtifactRecord,
    RepoIndex,
    artifact_id_for_path,
    classify_kind,
    extract_symbols,
    index_file_map,
    read_tree,
)
from agentlens.schemas import LEVEL1_SCHEMA, LEVEL2_SCHEMA, validation_errors
from agentlens.session import (
    AgentSession,
    FileModification,
    parse_session_log,
    replay_session,
)


@dataclass
class SessionAnalysis:
    """Everything derived from one (session, repository) pair."""

    session: AgentSession
    timeline: list[FileModification]
    index: RepoIndex
    files: dict[str, str]
    _profile: ConventionProfile | None = None

    @property
    def snapshot_id(self) -> str:
        return self.index.snapshot_id

    def profile(self) -> ConventionProfile:
        if self._profile is None:
            self._profile = profile_repository(self.index, lambda path: self.files[path])
        return self._profile


def _changed_post_ranges(mod: FileModification) -> list[tuple[int, int]]:
    """Post-image line ranges actually touched: added lines, or the splice
    point of a pure removal.  Context lines do not count as touched."""
    ranges: list[tuple[int, int]] = []
    for hunk in mod.hunks:
        post_line = hunk.post_start
        added: list[int] = []
        splice: int | None = None
        for tag, _ in hunk.ops:
            if tag == "+":
                added.append(post_line)
            if tag == "-" and splice is None:
                splice = post_line
            if tag in (" ", "+"):
                post_line += 1
        if added:
            ranges.append((min(added), max(added)))
        elif splice is not None and hunk.post_len > 0:
            last = hunk.post_start + hunk.post_len - 1
            point = min(max(splice, hunk.post_start), last)
            ranges.append((point, point))
    return ranges


def _touched_symbols(mod: FileModification, post_text: str) -> tuple[str, ...]:
    if mod.kind == "deleted" or classify_kind(mod.path) != "source" or not post_text:
        return ()
    probe = ArtifactRecord(
        artifact_id=artifact_id_for_path(mod.path),
        path=mod.path,
        kind="source",
        line_count=0,
        content_digest="",
    )
    ranges = _changed_post_ranges(mod)
    names: list[str] = []
    for symbol in extract_symbols(probe, post_text):
        if any(start <= symbol.span.end and symbol.span.start <= end for start, end in ranges):
            if symbol.name not in names:
                names.append(symbol.name)
    return tuple(names)


def enrich_timeline(replay) -> list[FileModification]:
    """Attach touched post-state symbol names to each modification."""
    return [
        dataclasses.replace(
            mod, post_symbols=_touched_symbols(mod, replay.post_files[mod.path])
        )
        for mod in replay.timeline
    ]


def analyze_session(
    session: AgentSession,
    repo_root: str | Path | None = None,
    ignore_rules: tuple[str, ...] = (),
) -> SessionAnalysis:
    """Replay the session and index the resulting post-state snapshot."""
    root = Path(repo_root) if repo_root is not None else Path(session.repo_root)
    replay = replay_session(session, root)
    files, warnings = read_tree(root, ignore_rules)

    for mod in replay.timeline:
        if mod.kind == "deleted":
            if mod.path in replay.existed_before:
                files[mod.path] = replay.pre_files[mod.path]
            else:
                files.pop(mod.path, None)
        else:
            files[mod.path] = replay.post_files[mod.path]

    timeline = enrich_timeline(replay)
    index = index_file_map(files, warnings=warnings)
    return SessionAnalysis(session=session, timeline=timeline, index=index, files=files)


def analyze_session_log(
    raw: bytes,
    repo_root: str | Path | None = None,
    ignore_rules: tuple[str, ...] = (),
) -> SessionAnalysis:
    return analyze_session(parse_session_log(raw), repo_root, ignore_rules)


def _check_closure(document: dict, schema: dict) -> dict:
    errors = validation_errors(document, schema)
    if errors:
        raise ValidationError(
            "generated document violates its published schema: " + "; ".join(errors)
        )
    return document


def build_level1(analysis: SessionAnalysis, backend: GenerationBackend) -> Level1Explanation:
    return generate_level1(
        analysis.timeline,
        analysis.index,
        backend,
        task_prompt=analysis.session.task_prompt,
    )


def level1_document(analysis: SessionAnalysis, backend: GenerationBackend) -> dict:
    explanation = build_level1(analysis, backend)
    document = explanation.to_document(analysis.session.session_id, analysis.snapshot_id)
    return _check_closure(document, LEVEL1_SCHEMA)


def build_level2(
    analysis: SessionAnalysis,
    order_index: int,
    backend: GenerationBackend,
    budget: int | None = None,
    max_repairs: int | None = None,
) -> Level2Explanation:
    if not 0 <= order_index < len(analysis.timeline):
        raise RangeError(
            f"change index {order_index} out of range; session has "
            f"{len(analysis.timeline)} modification(s)"
        )
    kwargs = {}
    if budget is not None:
        kwargs["budget"] = budget
    if max_repairs is not None:
        kwargs["max_repairs"] = max_repairs
    return generate_level2(
        analysis.timeline[order_index],
        analysis.index,
        analysis.profile(),
        backend,
        task_prompt=analysis.session.task_prompt,
        **kwargs,
    )


def level2_document(
    analysis: SessionAnalysis,
    order_index: int,
    backend: GenerationBackend,
    budget: int | None = None,
    max_repairs: int | None = None,
) -> dict:
    explanation = build_level2(analysis, order_index, backend, budget, max_repairs)
    document = explanation.to_document(analysis.session.session_id)
    return _check_closure(document, LEVEL2_SCHEMA)
