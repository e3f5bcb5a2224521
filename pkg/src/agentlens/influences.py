"""Rank which existing artifacts plausibly guided a modification.

Scoring is a fixed linear blend of four interpretable components:

    score = 0.5 * identifier_overlap + 0.3 * reference_link
          + 0.1 * path_proximity     + 0.1 * doc_mention

identifier_overlap is the Jaccard similarity between the change's added
identifier tokens and the artifact's token set; reference_link is 1 when an
import/include edge connects the two files in either direction; path
proximity is 1/(1+d) with d the number of directory components not shared;
doc_mention is 1 for documentation artifacts containing at least one of the
change's tokens.

Path proximity is a weak prior, not evidence: it contributes only when at
least one content signal (overlap, edge, doc mention) is present, so
artifacts with nothing in common score exactly 0 and are excluded.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

from agentlens.diffs import LineRange
from agentlens.errors import ContractError
from agentlens.identifiers import split_identifier
from agentlens.repo_index import (
    ArtifactRecord,
    EvidenceAnchor,
    RepoIndex,
    SymbolRecord,
)
from agentlens.session import FileModification, extract_added_identifiers

SCORE_WEIGHTS = {
    "identifier_overlap": 0.5,
    "reference_link": 0.3,
    "path_proximity": 0.1,
    "doc_mention": 0.1,
}

DEFAULT_TOP_K = 5
DEFAULT_MAX_EVIDENCE_SPANS = 3


class _CallCounter:
    """Instrumentation hook: proves Level 1 generation never ranks influences."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._count = 0

    def increment(self) -> None:
        with self._lock:
            self._count += 1

    @property
    def count(self) -> int:
        with self._lock:
            return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0


rank_calls = _CallCounter()


@dataclass(frozen=True)
class InfluenceCandidate:
    artifact_id: str
    path: str
    matched_symbols: tuple[SymbolRecord, ...]
    score: float
    score_parts: dict[str, float]
    evidence: tuple[EvidenceAnchor, ...]

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "path": self.path,
            "matched_symbols": [s.to_dict() for s in self.matched_symbols],
            "score": self.score,
            "score_parts": dict(self.score_parts),
            "evidence": [a.to_dict() for a in self.evidence],
        }


def path_distance(path_a: str, path_b: str) -> int:
    """Directory components of either path not on the shared prefix."""
    dirs_a = path_a.split("/")[:-1]
    dirs_b = path_b.split("/")[:-1]
    common = 0
    for a, b in zip(dirs_a, dirs_b):
        if a != b:
            break
        common += 1
    return (len(dirs_a) - common) + (len(dirs_b) - common)


def _artifact_token_set(index: RepoIndex, artifact_id: str) -> set[str]:
    return {token for token, by_artifact in index.postings.items() if artifact_id in by_artifact}


def _change_tokens(mod: FileModification) -> set[str]:
    return set(extract_added_identifiers(mod))


def _has_edge(index: RepoIndex, a: str, b: str) -> bool:
    return (a, b) in index.reference_edges or (b, a) in index.reference_edges


def score_candidate(
    mod: FileModification,
    artifact: ArtifactRecord,
    index: RepoIndex,
    weights: dict[str, float] | None = None,
) -> InfluenceCandidate:
    """Score one artifact against one modification (no ranking, no cutoff).

    ``weights`` may override the normative defaults; tests and the shipped
    configuration always use SCORE_WEIGHTS.
    """
    if artifact.path == mod.path:
        raise ContractError("a modified file cannot influence itself")
    if weights is None:
        weights = SCORE_WEIGHTS
    change_tokens = _change_tokens(mod)
    artifact_tokens = _artifact_token_set(index, artifact.artifact_id)

    union = change_tokens | artifact_tokens
    overlap = len(change_tokens & artifact_tokens) / len(union) if union else 0.0
    mod_artifact = index.artifact_by_path(mod.path)
    reference = (
        1.0
        if mod_artifact is not None
        and _has_edge(index, mod_artifact.artifact_id, artifact.artifact_id)
        else 0.0
    )
    doc_mention = (
        1.0
        if artifact.kind == "documentation" and change_tokens & artifact_tokens
        else 0.0
    )
    if overlap == 0.0 and reference == 0.0 and doc_mention == 0.0:
        proximity = 0.0
    else:
        proximity = 1.0 / (1.0 + path_distance(mod.path, artifact.path))
    parts = {
        "identifier_overlap": overlap,
        "reference_link": reference,
        "path_proximity": proximity,
        "doc_mention": doc_mention,
    }
    score = sum(weights[name] * value for name, value in parts.items())

    matched = tuple(
        sym
        for sym in sorted(index.symbols_of(artifact.artifact_id), key=lambda s: (s.span.start, s.name))
        if set(split_identifier(sym.name)) & change_tokens
    )
    candidate = InfluenceCandidate(
        artifact_id=artifact.artifact_id,
        path=artifact.path,
        matched_symbols=matched,
        score=score,
        score_parts=parts,
        evidence=(),
    )
    if score > 0.0:
        evidence = collect_evidence(candidate, index, DEFAULT_MAX_EVIDENCE_SPANS, change_tokens)
        candidate = InfluenceCandidate(
            artifact_id=candidate.artifact_id,
            path=candidate.path,
            matched_symbols=candidate.matched_symbols,
            score=candidate.score,
            score_parts=candidate.score_parts,
            evidence=tuple(evidence),
        )
    return candidate


def collect_evidence(
    candidate: InfluenceCandidate,
    index: RepoIndex,
    max_spans: int = DEFAULT_MAX_EVIDENCE_SPANS,
    change_tokens: set[str] | None = None,
) -> list[EvidenceAnchor]:
    """Evidence anchors for a scored candidate.

    Symbol-definition spans come first, then single-line token hits for the
    highest-weight matched tokens; overlapping spans are dropped and the
    result is sorted by start line.
    """
    if candidate.score <= 0.0:
        raise ContractError("collect_evidence requires a candidate with score > 0")
    record = index.artifact_by_id(candidate.artifact_id)
    if record is None:
        raise ContractError(f"candidate artifact {candidate.artifact_id!r} not in index")

    kept: list[EvidenceAnchor] = []

    def overlaps(span: LineRange) -> bool:
        return any(
            span.start <= a.span.end and a.span.start <= span.end for a in kept
        )

    for sym in candidate.matched_symbols:
        if len(kept) >= max_spans:
            break
        if sym.span.end <= record.line_count and not overlaps(sym.span):
            kept.append(
                EvidenceAnchor(
                    artifact_id=candidate.artifact_id,
                    span=sym.span,
                    label=f"definition of {sym.name}",
                )
            )

    if change_tokens is None:
        change_tokens = set()
    hit_tokens = [
        token
        for token in sorted(change_tokens)
        if candidate.artifact_id in index.postings.get(token, {})
    ]
    # Highest-weight first: tokens hitting more lines carry more evidence.
    hit_tokens.sort(
        key=lambda t: (-len(index.postings[t][candidate.artifact_id]), t)
    )
    # First pass covers each matched token once; the second fills remaining
    # capacity with further hit lines of the same tokens.
    for fill in (False, True):
        for token in hit_tokens:
            if len(kept) >= max_spans:
                break
            for line_no in index.postings[token][candidate.artifact_id]:
                if len(kept) >= max_spans:
                    break
                span = LineRange(line_no, line_no)
                if not overlaps(span):
                    kept.append(
                        EvidenceAnchor(
                            artifact_id=candidate.artifact_id,
                            span=span,
                            label=f"uses '{token}'",
                        )
                    )
                    if not fill:
                        break

    if not kept and record.line_count > 0:
        # Reference-only influence: anchor the head of the linked artifact.
        kept.append(
            EvidenceAnchor(
                artifact_id=candidate.artifact_id,
                span=LineRange(1, min(record.line_count, 3)),
                label="linked by import/include",
            )
        )
    kept.sort(key=lambda a: (a.span.start, a.span.end))
    return kept[:max_spans]


def rank_influences(
    mod: FileModification,
    index: RepoIndex,
    k: int = DEFAULT_TOP_K,
    weights: dict[str, float] | None = None,
) -> list[InfluenceCandidate]:
    """Top-k influences for a modification, strongest first.

    Candidates are gathered from the inverted index (token hits) and the
    reference edges, scored, filtered to score > 0, and sorted by descending
    score with ties broken by ascending path.  Artifacts with no lines are
    never returned: they cannot carry evidence.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    rank_calls.increment()
    change_tokens = _change_tokens(mod)
    candidate_ids: set[str] = set()
    for token in change_tokens:
        candidate_ids.update(index.postings.get(token, {}).keys())
    mod_artifact = index.artifact_by_path(mod.path)
    if mod_artifact is not None:
        for src, dst in index.reference_edges:
            if src == mod_artifact.artifact_id:
                candidate_ids.add(dst)
            elif dst == mod_artifact.artifact_id:
                candidate_ids.add(src)

    results: list[InfluenceCandidate] = []
    for artifact_id in candidate_ids:
        record = index.artifact_by_id(artifact_id)
        if record is None or record.path == mod.path or record.line_count == 0:
            continue
        candidate = score_candidate(mod, record, index, weights)
        if candidate.score > 0.0:
            results.append(candidate)
    results.sort(key=lambda c: (-c.score, c.path))
    return results[:k]
