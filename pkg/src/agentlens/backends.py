"""Text-generation backends.

A backend turns a structured prompt of analyzer facts into the free-text
parts of an explanation, constrained by an output schema.  The template
backend ships with the engine, is fully deterministic, and is the backend
every test runs against; the remote backend forwards the same contract to an
HTTP endpoint and is configuration, not a test dependency.
"""
from __future__ import annotations

import json
import re
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from agentlens.errors import GenerationError, ValidationError

_KIND_VERBS = {"created": "Create", "modified": "Update", "deleted": "Delete"}

SIGNIFICANCE_HIGH_LINES = 30
SIGNIFICANCE_LOW_LINES = 3

# Change-shape rules for the single suggested alternative, first match wins.
_CLASS_WITH_BASE = re.compile(r"^\s*class\s+\w+\s*\(\s*[^)\s][^)]*\)|\bextends\s+\w+")
_ALTERNATIVE_RULES: tuple[tuple[str, "re.Pattern[str]", dict], ...] = (
    (
        "loop_accumulation",
        re.compile(r"^\s*for\s.+:"),
        {
            "title": "Build the collection with a comprehension",
            "description": (
                "The added loop accumulates values imperatively; a list or dict "
                "comprehension (or generator expression) could express the same "
                "transformation as a single declarative construct."
            ),
            "tradeoffs": [
                {
                    "aspect": "readability",
                    "comparison": "a comprehension states intent in one expression, but nested logic inside it becomes harder to follow than an explicit loop",
                },
                {
                    "aspect": "debuggability",
                    "comparison": "an explicit loop offers places for breakpoints and logging that a comprehension hides",
                },
            ],
        },
    ),
    (
        "inheritance",
        _CLASS_WITH_BASE,
        {
            "title": "Use composition instead of inheritance",
            "description": (
                "The added class extends an existing base; holding the collaborator "
                "as a field and delegating to it would decouple the two types."
            ),
            "tradeoffs": [
                {
                    "aspect": "coupling",
                    "comparison": "composition narrows the contract to the delegated calls, while inheritance exposes the whole base surface",
                },
                {
                    "aspect": "boilerplate",
                    "comparison": "delegation needs explicit forwarding methods that inheritance gives for free",
                },
            ],
        },
    ),
    (
        "conditional_chain",
        re.compile(r"^\s*(elif\s|\}?\s*else\s+if\b)"),
        {
            "title": "Replace the conditional chain with a dispatch table",
            "description": (
                "The added branching selects behavior by case; a mapping from key "
                "to handler would make the cases data instead of control flow."
            ),
            "tradeoffs": [
                {
                    "aspect": "extensibility",
                    "comparison": "new cases become table entries rather than new branches, but fall-through and guard conditions are harder to express",
                },
                {
                    "aspect": "locality",
                    "comparison": "a table centralizes the cases while a chain keeps each condition next to its effect",
                },
            ],
        },
    ),
    (
        "manual_resource",
        re.compile(r"\bopen\s*\("),
        {
            "title": "Manage the resource with a context manager",
            "description": (
                "The added code opens a resource directly; a with-block (or "
                "try/finally) would tie its lifetime to the enclosing scope."
            ),
            "tradeoffs": [
                {
                    "aspect": "safety",
                    "comparison": "a context manager guarantees release on every exit path, at the cost of one more nesting level",
                },
                {
                    "aspect": "flexibility",
                    "comparison": "manual handling allows the resource to outlive the block when that is actually intended",
                },
            ],
        },
    ),
)

_GENERIC_ALTERNATIVE = {
    "title": "Consider a different decomposition",
    "description": (
        "The same behavior could be reached by splitting the change differently, "
        "for example extracting the new logic into a dedicated helper or inlining "
        "it at the single call site."
    ),
    "tradeoffs": [
        {
            "aspect": "cohesion",
            "comparison": "a dedicated helper isolates the new behavior for reuse and testing, while inlining keeps the logic where it is used",
        },
        {
            "aspect": "indirection",
            "comparison": "extraction adds a hop a reader must follow; inlining grows the enclosing function",
        },
    ],
}


class GenerationBackend(Protocol):
    """Capability contract: structured prompt + output schema -> document."""

    name: str

    def generate(self, structured_prompt: dict, output_schema: dict) -> dict:
        ...


class TemplateBackend:
    """Deterministic rule-based backend; identical inputs yield identical output."""

    name = "template"

    def generate(self, structured_prompt: dict, output_schema: dict) -> dict:
        intent = structured_prompt.get("intent")
        if intent == "level1_card":
            return self._card_text(structured_prompt)
        if intent == "level2_document":
            return self._level2_text(structured_prompt)
        raise GenerationError(f"template backend does not understand intent {intent!r}")

    # -- level 1 -------------------------------------------------------------

    def _card_text(self, prompt: dict) -> dict:
        mod = prompt["modification"]
        path = mod["path"]
        kind = mod["kind"]
        added = mod["added_lines"]
        removed = mod["removed_lines"]
        changed = added + removed
        if kind == "created" or changed >= SIGNIFICANCE_HIGH_LINES:
            significance = "high"
        elif changed <= SIGNIFICANCE_LOW_LINES:
            significance = "low"
        else:
            significance = "medium"
        if kind == "created":
            summary = f"Creates {path} with {added} added line(s)."
        elif kind == "deleted":
            summary = f"Deletes {path}, removing {removed} line(s)."
        else:
            hunk_count = len(mod["hunks"])
            summary = (
                f"Updates {path} with {added} added and {removed} removed "
                f"line(s) across {hunk_count} hunk(s)."
            )
        symbols = mod.get("post_symbols") or []
        if symbols:
            summary += " Touches " + ", ".join(symbols) + "."
        return {
            "title": f"{_KIND_VERBS[kind]} {path}",
            "significance": significance,
            "summary": summary,
        }

    # -- level 2 -------------------------------------------------------------

    def _level2_text(self, prompt: dict) -> dict:
        mod = prompt["modification"]
        path = mod["path"]
        kind = mod["kind"]
        task = (prompt.get("task_prompt") or "").strip()
        paragraphs: list[dict] = []
        opening = {
            "created": f"A new file {path} was created",
            "deleted": f"The file {path} was deleted",
            "modified": f"The file {path} was modified",
        }[kind]
        if task:
            shown = task if len(task) <= 160 else task[:157] + "..."
            opening += f" while carrying out the task: {shown}"
        opening += "."
        influence_count = len(prompt.get("influences") or [])
        if influence_count:
            opening += (
                f" The implementation aligns with {influence_count} existing "
                "artifact(s) listed under codebase influences."
            )
        paragraphs.append({"text": opening, "hunk": None})
        for i, hunk in enumerate(mod["hunks"]):
            added = sum(1 for line in hunk["lines"] if line.startswith("+"))
            removed = sum(1 for line in hunk["lines"] if line.startswith("-"))
            if added and removed:
                text = f"Hunk {i + 1} replaces {removed} line(s) with {added} new line(s)"
            elif added:
                text = f"Hunk {i + 1} inserts {added} line(s)"
            elif removed:
                text = f"Hunk {i + 1} removes {removed} line(s)"
            else:
                text = f"Hunk {i + 1} leaves the surrounding context unchanged"
            if hunk["post_len"] > 0:
                post_end = hunk["post_start"] + hunk["post_len"] - 1
                text += f" at post-change lines {hunk['post_start']}-{post_end}."
            else:
                pre_end = hunk["pre_start"] + hunk["pre_len"] - 1
                text += f", clearing pre-change lines {hunk['pre_start']}-{pre_end}."
            paragraphs.append({"text": text, "hunk": i})
        return {
            "reasoning": paragraphs,
            "alternatives": [self._pick_alternative(mod)],
        }

    @staticmethod
    def _pick_alternative(mod: dict) -> dict:
        added_lines = [
            line[1:] for hunk in mod["hunks"] for line in hunk["lines"] if line.startswith("+")
        ]
        for rule_name, pattern, alternative in _ALTERNATIVE_RULES:
            hits = sum(1 for line in added_lines if pattern.search(line))
            needed = 2 if rule_name == "conditional_chain" else 1
            if hits >= needed:
                return json.loads(json.dumps(alternative))
        return json.loads(json.dumps(_GENERIC_ALTERNATIVE))


class RemoteBackend:
    """POSTs the structured prompt and schema to a configured endpoint."""

    name = "remote"

    def __init__(self, endpoint: str, model: str = "", timeout: float = 60.0):
        if not endpoint:
            raise ValidationError("remote backend requires an endpoint")
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout

    def generate(self, structured_prompt: dict, output_schema: dict) -> dict:
        payload = json.dumps(
            {"model": self.model, "prompt": structured_prompt, "schema": output_schema}
        ).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=payload, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                return json.loads(response.read().decode("utf-8"))
        except Exception as exc:
            raise GenerationError(f"remote backend call failed: {exc}") from exc


@dataclass(frozen=True)
class BackendConfig:
    backend: str = "template"
    endpoint: str = ""
    model: str = ""
    budget: int = 4000
    max_repairs: int = 2

    @classmethod
    def from_dict(cls, doc: dict) -> "BackendConfig":
        known = {f: doc[f] for f in ("backend", "endpoint", "model", "budget", "max_repairs") if f in doc}
        config = cls(**known)
        if config.backend not in ("template", "remote"):
            raise ValidationError(f"unknown backend {config.backend!r}")
        if config.budget <= 0:
            raise ValidationError("budget must be positive")
        if config.max_repairs < 0:
            raise ValidationError("max_repairs must be >= 0")
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "BackendConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def make_backend(config: BackendConfig) -> GenerationBackend:
    if config.backend == "remote":
        return RemoteBackend(endpoint=config.endpoint, model=config.model)
    return TemplateBackend()
