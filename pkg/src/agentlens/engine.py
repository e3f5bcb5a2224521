"""Two-level explanation assembly.

Level 1 is the cheap per-file summary pass; Level 2 is the on-demand deep
document for one modification.  Anchors are attached here, never by the
backend, so every claim stays resolvable against the session snapshot.
Constructing Level 1 performs no influence ranking at all; that work happens
only inside generate_level2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from agentlens.backends import GenerationBackend
from agentlens.conventions import ConventionFinding, ConventionProfile, check_adherence
from agentlens.diffs import LineRange
from agentlens.errors import BudgetError, GenerationError
from agentlens.influences import InfluenceCandidate, rank_influences
from agentlens.repo_index import EvidenceAnchor, RepoIndex, resolve_anchor
from agentlens.schemas import (
    CARD_TEXT_SCHEMA,
    DOCUMENT_VERSION,
    LEVEL2_TEXT_SCHEMA,
    validation_errors,
)
from agentlens.session import FileModification

DEFAULT_BUDGET = 4000
DEFAULT_MAX_REPAIRS = 2
DEFAULT_INFLUENCE_K = 5


@dataclass(frozen=True)
class SummaryCard:
    order_index: int
    path: str
    kind: str
    title: str
    significance: str
    summary: str
    anchors: tuple[EvidenceAnchor, ...]

    def to_dict(self) -> dict:
        return {
            "order_index": self.order_index,
            "path": self.path,
            "kind": self.kind,
            "title": self.title,
            "significance": self.significance,
            "summary": self.summary,
            "anchors": [a.to_dict() for a in self.anchors],
        }


@dataclass(frozen=True)
class Level1Explanation:
    cards: tuple[SummaryCard, ...]

    def to_document(self, session_id: str, snapshot_id: str) -> dict:
        return {
            "version": DOCUMENT_VERSION,
            "session_id": session_id,
            "snapshot_id": snapshot_id,
            "cards": [card.to_dict() for card in self.cards],
        }


@dataclass(frozen=True)
class Alternative:
    title: str
    description: str
    tradeoffs: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "description": self.description,
            "tradeoffs": [dict(t) for t in self.tradeoffs],
        }


@dataclass(frozen=True)
class Level2Explanation:
    order_index: int
    path: str
    influences: tuple[InfluenceCandidate, ...]
    conventions: tuple[ConventionFinding, ...]
    reasoning: tuple[tuple[str, EvidenceAnchor | None], ...]
    alternatives: tuple[Alternative, ...]

    def to_document(self, session_id: str) -> dict:
        return {
            "version": DOCUMENT_VERSION,
            "session_id": session_id,
            "order_index": self.order_index,
            "path": self.path,
            "influences": [c.to_dict() for c in self.influences],
            "conventions": [f.to_dict() for f in self.conventions],
            "reasoning": [
                {"text": text, "anchor": anchor.to_dict() if anchor else None}
                for text, anchor in self.reasoning
            ],
            "alternatives": [a.to_dict() for a in self.alternatives],
        }


@dataclass
class GenerationTranscript:
    """One backend exchange kept for error reporting."""

    attempt: int
    errors: list[str]
    output: object = field(repr=False, default=None)


def prompt_token_count(value) -> int:
    """Whitespace-token count over every string in a structure; numbers count 1."""
    if isinstance(value, str):
        return len(value.split())
    if isinstance(value, bool) or value is None:
        return 1
    if isinstance(value, (int, float)):
        return 1
    if isinstance(value, dict):
        return sum(prompt_token_count(v) for v in value.values())
    if isinstance(value, (list, tuple)):
        return sum(prompt_token_count(v) for v in value)
    return 1


def _hunk_prompt_entry(hunk) -> dict:
    return {
        "pre_start": hunk.pre_start,
        "pre_len": hunk.pre_len,
        "post_start": hunk.post_start,
        "post_len": hunk.post_len,
        "lines": [tag + content.rstrip("\n") for tag, content in hunk.ops],
    }


def _modification_prompt_entry(mod: FileModification) -> dict:
    return {
        "path": mod.path,
        "kind": mod.kind,
        "order_index": mod.order_index,
        "added_lines": mod.added_line_count,
        "removed_lines": mod.removed_line_count,
        "post_symbols": list(mod.post_symbols),
        "hunks": [_hunk_prompt_entry(h) for h in mod.hunks],
    }


def assemble_context(
    mod: FileModification,
    index: RepoIndex,
    influences: list[InfluenceCandidate],
    conventions: list[ConventionFinding],
    budget: int,
    task_prompt: str = "",
) -> dict:
    """Build the generation prompt, shrinking it to the token budget.

    Reduction order: evidence slices of the lowest-scoring influence go
    first, then hunk context lines are trimmed one layer at a time from both
    ends.  Every reduction is recorded in the prompt metadata.  If the hunks
    alone cannot fit, BudgetError is raised.
    """
    if budget <= 0:
        raise BudgetError("token budget must be positive")
    influence_entries = []
    for candidate in influences:
        slices = []
        for anchor in candidate.evidence:
            slices.append(
                {
                    "start": anchor.span.start,
                    "end": anchor.span.end,
                    "label": anchor.label,
                    "text": resolve_anchor(index, anchor),
                }
            )
        influence_entries.append(
            {
                "path": candidate.path,
                "score": candidate.score,
                "score_parts": dict(candidate.score_parts),
                "slices": slices,
            }
        )
    prompt = {
        "intent": "level2_document",
        "task_prompt": task_prompt,
        "modification": _modification_prompt_entry(mod),
        "influences": influence_entries,
        "conventions": [f.to_dict() for f in conventions],
        "metadata": {
            "budget": budget,
            "truncated": False,
            "dropped_slices": [],
            "context_trimmed": 0,
        },
    }

    def drop_one_slice() -> bool:
        order = sorted(
            range(len(influence_entries)),
            key=lambda i: (influence_entries[i]["score"], influence_entries[i]["path"]),
        )
        for i in order:
            entry = influence_entries[i]
            if entry["slices"]:
                dropped = entry["slices"].pop()
                prompt["metadata"]["dropped_slices"].append(
                    {"path": entry["path"], "start": dropped["start"], "end": dropped["end"]}
                )
                return True
        return False

    def trim_context_layer() -> bool:
        trimmed = False
        for hunk in prompt["modification"]["hunks"]:
            lines = hunk["lines"]
            if lines and lines[0].startswith(" "):
                lines.pop(0)
                trimmed = True
            if lines and lines[-1].startswith(" "):
                lines.pop()
                trimmed = True
        if trimmed:
            prompt["metadata"]["context_trimmed"] += 1
        return trimmed

    while prompt_token_count(prompt) > budget:
        if drop_one_slice() or trim_context_layer():
            prompt["metadata"]["truncated"] = True
            continue
        raise BudgetError(
            f"budget of {budget} tokens cannot hold the modification's hunks"
        )
    return prompt


def validate_and_repair(
    raw_output,
    schema: dict,
    backend: GenerationBackend,
    max_repairs: int = DEFAULT_MAX_REPAIRS,
    prompt: dict | None = None,
) -> dict:
    """Return the first backend output that validates against ``schema``.

    Each failed validation re-prompts the backend with the errors appended,
    at most ``max_repairs`` times; exhaustion raises GenerationError carrying
    the full transcripts.
    """
    if max_repairs < 0:
        raise GenerationError("max_repairs must be >= 0")
    transcripts: list[GenerationTranscript] = []
    output = raw_output
    for attempt in range(max_repairs + 1):
        errors = validation_errors(output, schema)
        transcripts.append(GenerationTranscript(attempt=attempt, errors=errors, output=output))
        if not errors:
            return output
        if attempt == max_repairs:
            break
        repair_prompt = dict(prompt or {})
        repair_prompt["repair"] = {
            "attempt": attempt + 1,
            "validation_errors": errors,
            "previous_output": output,
        }
        output = backend.generate(repair_prompt, schema)
    raise GenerationError(
        f"backend output failed validation after {max_repairs} repair attempt(s)",
        transcripts=transcripts,
    )


def _generate_validated(
    prompt: dict, schema: dict, backend: GenerationBackend, max_repairs: int
) -> dict:
    raw = backend.generate(prompt, schema)
    return validate_and_repair(raw, schema, backend, max_repairs, prompt)


def _card_anchors(mod: FileModification, index: RepoIndex) -> tuple[EvidenceAnchor, ...]:
    anchors = []
    record = index.artifact_by_path(mod.path)
    if record is None:
        return ()
    for i, hunk in enumerate(mod.hunks):
        post = hunk.post_range
        if post is not None and post.end <= record.line_count:
            anchors.append(
                EvidenceAnchor(artifact_id=record.artifact_id, span=post, label=f"hunk {i + 1}")
            )
    if not anchors and mod.kind == "deleted" and record.line_count > 0:
        anchors.append(
            EvidenceAnchor(
                artifact_id=record.artifact_id,
                span=LineRange(1, record.line_count),
                label="removed content",
            )
        )
    return tuple(anchors)


def generate_level1(
    timeline: list[FileModification],
    index: RepoIndex,
    backend: GenerationBackend,
    task_prompt: str = "",
    max_repairs: int = DEFAULT_MAX_REPAIRS,
) -> Level1Explanation:
    """One summary card per modification, in timeline order."""
    cards: list[SummaryCard] = []
    for mod in timeline:
        prompt = {
            "intent": "level1_card",
            "task_prompt": task_prompt,
            "modification": _modification_prompt_entry(mod),
        }
        try:
            text = _generate_validated(prompt, CARD_TEXT_SCHEMA, backend, max_repairs)
        except GenerationError as exc:
            raise GenerationError(
                f"card generation failed for {mod.path}: {exc}",
                transcripts=exc.transcripts,
                partial=Level1Explanation(cards=tuple(cards)),
            ) from exc
        cards.append(
            SummaryCard(
                order_index=mod.order_index,
                path=mod.path,
                kind=mod.kind,
                title=text["title"],
                significance=text["significance"],
                summary=text["summary"],
                anchors=_card_anchors(mod, index),
            )
        )
    return Level1Explanation(cards=tuple(cards))


def generate_level2(
    mod: FileModification,
    index: RepoIndex,
    profile: ConventionProfile,
    backend: GenerationBackend,
    task_prompt: str = "",
    k: int = DEFAULT_INFLUENCE_K,
    budget: int = DEFAULT_BUDGET,
    max_repairs: int = DEFAULT_MAX_REPAIRS,
    structural_rules: list[dict] | None = None,
) -> Level2Explanation:
    """Deep rationale for one modification; call only on explicit request."""
    influences = rank_influences(mod, index, k)
    conventions = check_adherence(mod, profile, structural_rules)
    prompt = assemble_context(mod, index, influences, conventions, budget, task_prompt)
    text = _generate_validated(prompt, LEVEL2_TEXT_SCHEMA, backend, max_repairs)

    record = index.artifact_by_path(mod.path)
    reasoning: list[tuple[str, EvidenceAnchor | None]] = []
    for paragraph in text["reasoning"]:
        anchor = None
        hunk_index = paragraph.get("hunk")
        if (
            hunk_index is not None
            and record is not None
            and 0 <= hunk_index < len(mod.hunks)
        ):
            post = mod.hunks[hunk_index].post_range
            if post is not None and post.end <= record.line_count:
                anchor = EvidenceAnchor(
                    artifact_id=record.artifact_id,
                    span=post,
                    label=f"hunk {hunk_index + 1}",
                )
        reasoning.append((paragraph["text"], anchor))
    alternatives = tuple(
        Alternative(
            title=alt["title"],
            description=alt["description"],
            tradeoffs=tuple(alt["tradeoffs"]),
        )
        for alt in text["alternatives"]
    )
    return Level2Explanation(
        order_index=mod.order_index,
        path=mod.path,
        influences=tuple(influences),
        conventions=tuple(conventions),
        reasoning=tuple(reasoning),
        alternatives=alternatives,
    )
