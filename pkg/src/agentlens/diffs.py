"""Unified-diff parsing, application, and generation.

Lines are split on "\n" only; carriage returns and other control characters
are treated as line content so that parse-then-apply round-trips byte-exactly.
A line without a trailing "\n" (end of file) is carried verbatim and encoded
with the conventional "\\ No newline at end of file" marker in diff text.
"""
from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field

from agentlens.errors import ApplyError, ParseError

_HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@(?: .*)?$")
_NO_EOL_MARKER = "\\ No newline at end of file"


@dataclass(frozen=True, order=True)
class LineRange:
    """1-based inclusive line range."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 1 or self.end < self.start:
            raise ValueError(f"invalid line range {self.start}..{self.end}")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def to_dict(self) -> dict[str, int]:
        return {"start": self.start, "end": self.end}


@dataclass(frozen=True)
class ChangeHunk:
    """One contiguous edit region.

    ``ops`` is the ordered hunk body: (tag, content) pairs with tag one of
    " ", "+", "-".  Content includes the trailing newline except for a final
    line of a file that ends without one.
    """

    pre_start: int
    pre_len: int
    post_start: int
    post_len: int
    ops: tuple[tuple[str, str], ...] = field(repr=False)

    @property
    def pre_range(self) -> LineRange | None:
        """Pre-image lines this hunk covers; None for pure insertions."""
        if self.pre_len == 0:
            return None
        return LineRange(self.pre_start, self.pre_start + self.pre_len - 1)

    @property
    def post_range(self) -> LineRange | None:
        """Post-image lines this hunk produces; None for pure deletions."""
        if self.post_len == 0:
            return None
        return LineRange(self.post_start, self.post_start + self.post_len - 1)

    @property
    def added_lines(self) -> list[str]:
        return [content.rstrip("\n") for tag, content in self.ops if tag == "+"]

    @property
    def removed_lines(self) -> list[str]:
        return [content.rstrip("\n") for tag, content in self.ops if tag == "-"]

    def to_dict(self) -> dict:
        return {
            "pre_start": self.pre_start,
            "pre_len": self.pre_len,
            "post_start": self.post_start,
            "post_len": self.post_len,
            "added_lines": self.added_lines,
            "removed_lines": self.removed_lines,
        }

    def validate(self) -> None:
        context = sum(1 for tag, _ in self.ops if tag == " ")
        added = sum(1 for tag, _ in self.ops if tag == "+")
        removed = sum(1 for tag, _ in self.ops if tag == "-")
        if context + added != self.post_len:
            raise ParseError(
                f"hunk body mismatch: header claims {self.post_len} post lines, "
                f"body has {context + added}"
            )
        if context + removed != self.pre_len:
            raise ParseError(
                f"hunk body mismatch: header claims {self.pre_len} pre lines, "
                f"body has {context + removed}"
            )


def split_lines(text: str) -> list[str]:
    """Split on "\n" only, keeping line terminators.

    "" -> [];  "a\nb" -> ["a\n", "b"];  "a\nb\n" -> ["a\n", "b\n"].
    """
    if not text:
        return []
    parts = text.split("\n")
    lines = [part + "\n" for part in parts[:-1]]
    if parts[-1]:
        lines.append(parts[-1])
    return lines


def parse_unified_diff(diff_text: str) -> list[ChangeHunk]:
    """Parse unified-diff text into hunks.

    Accepts optional ---/+++ header lines (ignored; the session log carries
    paths on the event itself).  Raises ParseError on malformed headers or a
    hunk body that disagrees with its header counts.
    """
    if not diff_text.strip():
        return []
    lines = diff_text.split("\n")
    i = 0
    while i < len(lines) and (lines[i].startswith("--- ") or lines[i].startswith("+++ ")):
        i += 1
    hunks: list[ChangeHunk] = []
    while i < len(lines):
        line = lines[i]
        if line == "":
            i += 1
            continue
        m = _HUNK_HEADER.match(line)
        if not m:
            raise ParseError(f"malformed hunk header: {line!r}")
        pre_start = int(m.group(1))
        pre_len = int(m.group(2)) if m.group(2) is not None else 1
        post_start = int(m.group(3))
        post_len = int(m.group(4)) if m.group(4) is not None else 1
        i += 1
        ops: list[tuple[str, str]] = []
        while i < len(lines):
            body = lines[i]
            if body.startswith("@@"):
                break
            if body == "" and i == len(lines) - 1:
                i += 1
                break
            if body.startswith(_NO_EOL_MARKER[0]):
                if not ops:
                    raise ParseError("no-newline marker before any hunk line")
                tag, content = ops[-1]
                ops[-1] = (tag, content.rstrip("\n"))
                i += 1
                continue
            tag = body[:1]
            if tag not in (" ", "+", "-"):
                raise ParseError(f"unexpected line in hunk body: {body!r}")
            ops.append((tag, body[1:] + "\n"))
            i += 1
        hunk = ChangeHunk(pre_start, pre_len, post_start, post_len, tuple(ops))
        hunk.validate()
        hunks.append(hunk)
    return hunks


def apply_hunks(pre_text: str, hunks: list[ChangeHunk]) -> str:
    """Apply hunks (sorted by pre-image position) to a pre-image.

    Context and removed lines must match the pre-image exactly; a mismatch
    raises ApplyError with the offending hunk index.
    """
    pre_lines = split_lines(pre_text)
    out: list[str] = []
    cursor = 0  # 0-based index into pre_lines
    for idx, hunk in enumerate(hunks):
        # An empty pre-range header names the line *before* the insertion.
        target = hunk.pre_start - 1 if hunk.pre_len > 0 else hunk.pre_start
        if target < cursor or target > len(pre_lines):
            raise ApplyError(
                f"hunk {idx} starts at pre line {hunk.pre_start}, beyond cursor",
                hunk_index=idx,
            )
        out.extend(pre_lines[cursor:target])
        cursor = target
        for tag, content in hunk.ops:
            if tag == "+":
                out.append(content)
                continue
            if cursor >= len(pre_lines):
                raise ApplyError(f"hunk {idx} runs past end of pre-image", hunk_index=idx)
            if pre_lines[cursor] != content:
                raise ApplyError(
                    f"hunk {idx} context mismatch at pre line {cursor + 1}: "
                    f"expected {content!r}, found {pre_lines[cursor]!r}",
                    hunk_index=idx,
                )
            if tag == " ":
                out.append(content)
            cursor += 1
    out.extend(pre_lines[cursor:])
    return "".join(out)


def make_unified_diff(pre_text: str, post_text: str, context: int = 3) -> str:
    """Produce unified-diff text (hunk headers only, no ---/+++ lines)."""
    pre_lines = split_lines(pre_text)
    post_lines = split_lines(post_text)
    raw = difflib.unified_diff(pre_lines, post_lines, n=context, lineterm="\n")
    out: list[str] = []
    for line in raw:
        if line.startswith("--- ") or line.startswith("+++ "):
            continue
        if line.endswith("\n"):
            out.append(line)
        else:
            out.append(line + "\n")
            out.append(_NO_EOL_MARKER + "\n")
    return "".join(out)


def hunks_to_text(hunks: list[ChangeHunk]) -> str:
    """Serialize hunks back to unified-diff text (inverse of parse)."""
    out: list[str] = []
    for hunk in hunks:
        pre = f"{hunk.pre_start},{hunk.pre_len}" if hunk.pre_len != 1 else f"{hunk.pre_start}"
        post = f"{hunk.post_start},{hunk.post_len}" if hunk.post_len != 1 else f"{hunk.post_start}"
        out.append(f"@@ -{pre} +{post} @@\n")
        for tag, content in hunk.ops:
            if content.endswith("\n"):
                out.append(tag + content)
            else:
                out.append(tag + content + "\n")
                out.append(_NO_EOL_MARKER + "\n")
    return "".join(out)
