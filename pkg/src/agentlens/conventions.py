"""Infer repository conventions and check a modification against them.

Three deterministic dimensions are profiled: identifier naming style,
indentation (unit and width), and string-quote style.  Naming statistics use
raw, case-preserving identifiers (length >= 2, keyword-stoplisted) from
source artifacts plus every extracted symbol name; the case-folded index
tokens carry no style information.  Structural conventions are path-pattern
rules shipped as data.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fnmatch import fnmatch
from pathlib import Path

from agentlens.diffs import LineRange, split_lines
from agentlens.errors import ValidationError
from agentlens.identifiers import scan_identifiers, stoplist_for
from agentlens.repo_index import (
    ContentsProvider,
    EvidenceAnchor,
    RepoIndex,
    artifact_id_for_path,
    classify_kind,
)
from agentlens.session import FileModification

STYLES = ("snake", "camel", "pascal", "screaming", "ambiguous")
DOMINANCE_THRESHOLD = 0.7

_SINGLE_QUOTED = re.compile(r"'(?:[^'\\\n]|\\.)*'")
_DOUBLE_QUOTED = re.compile(r'"(?:[^"\\\n]|\\.)*"')

DEFAULT_STRUCTURAL_RULES = (
    {
        "name": "tests live under tests/",
        "glob_pattern": "tests/*",
        "description": "test modules are grouped in the tests/ directory",
    },
    {
        "name": "docs live under docs/",
        "glob_pattern": "docs/*",
        "description": "long-form documentation is grouped in the docs/ directory",
    },
)


def classify_identifier_style(name: str) -> str:
    """Classify one identifier into exactly one of the five styles.

    Checks run in a fixed order (snake, camel, pascal, screaming), so the
    styles are mutually exclusive by construction; anything left over,
    including single-token lowercase names, is ambiguous.
    """
    if not name:
        raise ValidationError("cannot classify an empty identifier")
    if "_" in name and name.islower():
        return "snake"
    if name[0].islower() and any(c.isupper() for c in name[1:]):
        return "camel"
    if name[0].isupper() and any(c.islower() for c in name):
        return "pascal"
    if "_" in name and name.isupper():
        return "screaming"
    return "ambiguous"


@dataclass(frozen=True)
class Indentation:
    unit: str  # spaces | tabs
    width: int

    def to_dict(self) -> dict:
        return {"unit": self.unit, "width": self.width}


@dataclass
class ConventionProfile:
    naming_distribution: dict[str, float]
    naming_counts: dict[str, int]
    dominant_naming: str | None
    indentation: Indentation | None
    quote_style: str  # single | double | mixed | n/a
    sample_anchors: dict[str, EvidenceAnchor] = field(default_factory=dict)

    @property
    def identifier_total(self) -> int:
        return sum(self.naming_counts.values())

    def to_dict(self) -> dict:
        return {
            "naming_distribution": dict(self.naming_distribution),
            "dominant_naming": self.dominant_naming,
            "indentation": self.indentation.to_dict() if self.indentation else None,
            "quote_style": self.quote_style,
        }


@dataclass(frozen=True)
class ConventionFinding:
    convention: str
    rationale: str
    adherence: str  # followed | violated | not_applicable
    example_span: EvidenceAnchor | None = None

    def to_dict(self) -> dict:
        return {
            "convention": self.convention,
            "rationale": self.rationale,
            "adherence": self.adherence,
            "example_span": self.example_span.to_dict() if self.example_span else None,
        }


def _leading_whitespace(line: str) -> str:
    return line[: len(line) - len(line.lstrip(" \t"))]


def _homogeneous_indent(line: str) -> tuple[str, int] | None:
    """(unit, width) of a line's indent; None for blank or mixed indents."""
    if not line.strip():
        return None
    ws = _leading_whitespace(line)
    if not ws:
        return ("none", 0)
    if set(ws) == {" "}:
        return ("spaces", len(ws))
    if set(ws) == {"\t"}:
        return ("tabs", len(ws))
    return None


def profile_repository(
    index: RepoIndex,
    contents_provider: ContentsProvider,
    dominance_threshold: float = DOMINANCE_THRESHOLD,
) -> ConventionProfile:
    """Profile naming, indentation, and quote style across the snapshot.

    Aggregation is commutative over files, so the result does not depend on
    processing order.  An empty repository yields an all-undetermined profile.
    The dominance threshold is overridable but 0.7 is the normative default.
    """
    style_counts = {style: 0 for style in STYLES}
    style_anchor: dict[str, EvidenceAnchor] = {}
    unit_votes = {"spaces": 0, "tabs": 0}
    width_deltas: dict[int, int] = {}
    space_widths: dict[int, int] = {}
    unit_anchor: dict[str, EvidenceAnchor] = {}
    quote_counts = {"single": 0, "double": 0}
    quote_anchor: dict[str, EvidenceAnchor] = {}

    for symbol in index.symbols:
        style_counts[classify_identifier_style(symbol.name)] += 1

    for artifact in index.artifacts:  # already sorted by path
        if artifact.kind != "source":
            continue
        text = contents_provider(artifact.path)
        stoplist = stoplist_for(artifact.path)
        lines = split_lines(text)
        previous_space_width = 0
        for line_no, raw_line in enumerate(lines, start=1):
            line = raw_line.rstrip("\n")
            for ident in scan_identifiers(line):
                if len(ident) < 2 or ident in stoplist:
                    continue
                style = classify_identifier_style(ident)
                style_counts[style] += 1
                if style not in style_anchor:
                    style_anchor[style] = EvidenceAnchor(
                        artifact_id=artifact.artifact_id,
                        span=LineRange(line_no, line_no),
                        label=f"{style} identifier '{ident}'",
                    )
            indent = _homogeneous_indent(line)
            if indent is not None:
                unit, width = indent
                if unit == "spaces":
                    unit_votes["spaces"] += 1
                    space_widths[width] = space_widths.get(width, 0) + 1
                    if width > previous_space_width:
                        delta = width - previous_space_width
                        width_deltas[delta] = width_deltas.get(delta, 0) + 1
                    previous_space_width = width
                elif unit == "tabs":
                    unit_votes["tabs"] += 1
                else:
                    previous_space_width = 0
                if unit in ("spaces", "tabs") and unit not in unit_anchor:
                    unit_anchor[unit] = EvidenceAnchor(
                        artifact_id=artifact.artifact_id,
                        span=LineRange(line_no, line_no),
                        label=f"{unit}-indented line",
                    )
            singles = len(_SINGLE_QUOTED.findall(line))
            doubles = len(_DOUBLE_QUOTED.findall(line))
            quote_counts["single"] += singles
            quote_counts["double"] += doubles
            for style_name, hits in (("single", singles), ("double", doubles)):
                if hits and style_name not in quote_anchor:
                    quote_anchor[style_name] = EvidenceAnchor(
                        artifact_id=artifact.artifact_id,
                        span=LineRange(line_no, line_no),
                        label=f"{style_name}-quoted string",
                    )

    total = sum(style_counts.values())
    distribution = {
        style: (style_counts[style] / total if total else 0.0) for style in STYLES
    }
    dominant = None
    for style in ("snake", "camel", "pascal", "screaming"):
        if distribution[style] >= dominance_threshold:
            dominant = style
            break

    indentation: Indentation | None = None
    if unit_votes["spaces"] or unit_votes["tabs"]:
        if unit_votes["tabs"] > unit_votes["spaces"]:
            indentation = Indentation(unit="tabs", width=1)
        else:
            if width_deltas:
                best = min(sorted(width_deltas), key=lambda w: (-width_deltas[w], w))
            elif space_widths:
                best = min(sorted(space_widths), key=lambda w: (-space_widths[w], w))
            else:
                best = 4
            indentation = Indentation(unit="spaces", width=best)

    if quote_counts["single"] > quote_counts["double"]:
        quote_style = "single"
    elif quote_counts["double"] > quote_counts["single"]:
        quote_style = "double"
    elif quote_counts["single"] > 0:
        quote_style = "mixed"
    else:
        quote_style = "n/a"

    sample_anchors: dict[str, EvidenceAnchor] = {}
    if dominant is not None and dominant in style_anchor:
        sample_anchors["naming"] = style_anchor[dominant]
    if indentation is not None and indentation.unit in unit_anchor:
        sample_anchors["indentation"] = unit_anchor[indentation.unit]
    if quote_style in quote_anchor:
        sample_anchors["quote_style"] = quote_anchor[quote_style]

    return ConventionProfile(
        naming_distribution=distribution,
        naming_counts=style_counts,
        dominant_naming=dominant,
        indentation=indentation,
        quote_style=quote_style,
        sample_anchors=sample_anchors,
    )


def load_structural_rules(path: str | Path) -> list[dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list):
        raise ValidationError("structural rule file must hold a JSON list")
    for rule in doc:
        for key in ("name", "glob_pattern", "description"):
            if key not in rule:
                raise ValidationError(f"structural rule missing {key!r}: {rule!r}")
    return doc


def _added_lines_with_post_numbers(mod: FileModification) -> list[tuple[int, str]]:
    out: list[tuple[int, str]] = []
    for hunk in mod.hunks:
        post_line = hunk.post_start
        for tag, content in hunk.ops:
            if tag == "+":
                out.append((post_line, content.rstrip("\n")))
                post_line += 1
            elif tag == " ":
                post_line += 1
    return out


def _line_anchor(mod: FileModification, line_no: int, label: str) -> EvidenceAnchor:
    return EvidenceAnchor(
        artifact_id=artifact_id_for_path(mod.path),
        span=LineRange(line_no, line_no),
        label=label,
    )


def check_adherence(
    mod: FileModification,
    profile: ConventionProfile,
    structural_rules: list[dict] | None = None,
) -> list[ConventionFinding]:
    """One finding per applicable convention for a modification.

    ``violated`` always points at the first nonconforming added line of the
    post-state; conventions without a dominant repo-wide rule (or that make
    no sense for the file kind) come back not_applicable.
    """
    findings: list[ConventionFinding] = []
    is_source = classify_kind(mod.path) == "source"
    added = _added_lines_with_post_numbers(mod)
    stoplist = stoplist_for(mod.path)

    # -- naming ------------------------------------------------------------
    if not is_source:
        findings.append(
            ConventionFinding(
                convention="naming style",
                rationale=f"{mod.path} is not a source file; naming rules do not apply",
                adherence="not_applicable",
            )
        )
    elif profile.dominant_naming is None:
        findings.append(
            ConventionFinding(
                convention="naming style",
                rationale=(
                    "no naming style reaches the "
                    f"{DOMINANCE_THRESHOLD:.0%} dominance threshold in this repository"
                ),
                adherence="not_applicable",
            )
        )
    else:
        dominant = profile.dominant_naming
        pct = profile.naming_distribution[dominant]
        rationale = f"{pct:.1%} of repository identifiers use {dominant} naming"
        violation = None
        example = None
        for line_no, line in added:
            for ident in scan_identifiers(line):
                if len(ident) < 2 or ident in stoplist:
                    continue
                style = classify_identifier_style(ident)
                if style == dominant and example is None:
                    example = _line_anchor(mod, line_no, f"conforming identifier '{ident}'")
                if style not in (dominant, "ambiguous"):
                    violation = _line_anchor(mod, line_no, f"nonconforming identifier '{ident}'")
                    break
            if violation:
                break
        findings.append(
            ConventionFinding(
                convention="naming style",
                rationale=rationale,
                adherence="violated" if violation else "followed",
                example_span=violation or example,
            )
        )

    # -- indentation ---------------------------------------------------------
    if not is_source or profile.indentation is None:
        findings.append(
            ConventionFinding(
                convention="indentation",
                rationale="no dominant indentation style was determined",
                adherence="not_applicable",
            )
        )
    else:
        indent_rule = profile.indentation
        rationale = f"repository code is indented with {indent_rule.width} {indent_rule.unit}"
        violation = None
        example = None
        for line_no, line in added:
            indent = _homogeneous_indent(line)
            if line.strip() and indent is None:
                violation = _line_anchor(mod, line_no, "mixed tab/space indentation")
                break
            if indent is None or indent[0] == "none":
                continue
            unit, width = indent
            conforms = unit == indent_rule.unit and (
                unit == "tabs" or width % indent_rule.width == 0
            )
            if conforms:
                if example is None:
                    example = _line_anchor(mod, line_no, f"{unit}-indented line")
            else:
                violation = _line_anchor(
                    mod, line_no, f"indent of {width} {unit} breaks the {indent_rule.width}-{indent_rule.unit} rule"
                )
                break
        findings.append(
            ConventionFinding(
                convention="indentation",
                rationale=rationale,
                adherence="violated" if violation else "followed",
                example_span=violation or example,
            )
        )

    # -- quote style ---------------------------------------------------------
    if not is_source or profile.quote_style not in ("single", "double"):
        findings.append(
            ConventionFinding(
                convention="quote style",
                rationale="no dominant string-quote style was determined",
                adherence="not_applicable",
            )
        )
    else:
        wanted = profile.quote_style
        other_re = _DOUBLE_QUOTED if wanted == "single" else _SINGLE_QUOTED
        wanted_re = _SINGLE_QUOTED if wanted == "single" else _DOUBLE_QUOTED
        rationale = f"the repository predominantly uses {wanted} quotes for strings"
        violation = None
        example = None
        for line_no, line in added:
            if example is None and wanted_re.search(line):
                example = _line_anchor(mod, line_no, f"{wanted}-quoted string")
            if other_re.search(line):
                violation = _line_anchor(mod, line_no, "string quoted against repository style")
                break
        findings.append(
            ConventionFinding(
                convention="quote style",
                rationale=rationale,
                adherence="violated" if violation else "followed",
                example_span=violation or example,
            )
        )

    # -- structural path patterns ---------------------------------------------
    rules = DEFAULT_STRUCTURAL_RULES if structural_rules is None else structural_rules
    for rule in rules:
        if fnmatch(mod.path, rule["glob_pattern"]):
            example = None
            if added:
                example = _line_anchor(mod, added[0][0], "change inside the matched path")
            findings.append(
                ConventionFinding(
                    convention=rule["name"],
                    rationale=rule["description"],
                    adherence="followed",
                    example_span=example,
                )
            )
    return findings
