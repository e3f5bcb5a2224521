"""Searchable snapshot of a codebase: artifacts, symbols, identifier postings,
and import/include reference edges.

The index itself is immutable once built and serializes to a versioned JSON
document.  File contents are not part of the document; loading a serialized
index requires re-attaching a contents provider (disk tree or in-memory map).
"""
from __future__ import annotations

import hashlib
import logging
import re
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from fnmatch import fnmatch
from pathlib import Path

from agentlens.diffs import LineRange, split_lines
from agentlens.errors import ContractError, NotFoundError, RangeError
from agentlens.identifiers import extension_of, stoplist_for, tokenize_text

logger = logging.getLogger(__name__)

INDEX_FORMAT_VERSION = 1

DOCUMENTATION_EXTENSIONS = frozenset({".md", ".rst", ".txt"})
CONFIG_EXTENSIONS = frozenset({".json", ".yaml", ".yml", ".toml", ".ini"})

DEFAULT_IGNORES = (
    ".git/",
    ".hg/",
    ".svn/",
    "__pycache__/",
    "*.pyc",
    "node_modules/",
    ".venv/",
    ".lens-store/",
    ".lensignore",
)

IGNORE_FILE_NAME = ".lensignore"

# Heuristic symbol extraction: definition keyword at line start -> symbol kind.
_DEFINITION_KEYWORDS: dict[str, dict[str, str]] = {
    ".js": {"function": "function", "class": "type", "const": "constant"},
    ".jsx": {"function": "function", "class": "type", "const": "constant"},
    ".mjs": {"function": "function", "class": "type", "const": "constant"},
    ".cjs": {"function": "function", "class": "type", "const": "constant"},
    ".ts": {
        "function": "function",
        "class": "type",
        "interface": "type",
        "type": "type",
        "enum": "type",
        "const": "constant",
    },
    ".tsx": {
        "function": "function",
        "class": "type",
        "interface": "type",
        "type": "type",
        "enum": "type",
        "const": "constant",
    },
    ".go": {"func": "function", "type": "type", "const": "constant"},
    ".rs": {
        "fn": "function",
        "struct": "type",
        "enum": "type",
        "trait": "type",
        "const": "constant",
        "static": "constant",
    },
    ".java": {"class": "type", "interface": "type", "enum": "type", "record": "type"},
    ".rb": {"def": "function", "class": "type", "module": "type"},
    ".c": {"struct": "type", "enum": "type", "union": "type"},
    ".h": {"struct": "type", "enum": "type", "union": "type"},
    ".cpp": {"struct": "type", "enum": "type", "union": "type", "class": "type"},
    ".hpp": {"struct": "type", "enum": "type", "union": "type", "class": "type"},
    ".py": {"def": "function", "class": "type"},
}

_DEFINITION_MODIFIERS = frozenset(
    """export default pub public private protected static async abstract final
    declare unsafe extern inline""".split()
)

_IDENT_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

ContentsProvider = Callable[[str], str]


def artifact_id_for_path(path: str) -> str:
    """Stable 16-hex-char id derived from the relative path."""
    return hashlib.sha256(path.encode("utf-8")).hexdigest()[:16]


def classify_kind(path: str, kind_overrides: Mapping[str, str] | None = None) -> str:
    ext = extension_of(path)
    if kind_overrides and ext in kind_overrides:
        return kind_overrides[ext]
    if ext in DOCUMENTATION_EXTENSIONS:
        return "documentation"
    if ext in CONFIG_EXTENSIONS:
        return "config"
    return "source"


@dataclass(frozen=True)
class ArtifactRecord:
    artifact_id: str
    path: str
    kind: str  # source | documentation | config
    line_count: int
    content_digest: str

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "path": self.path,
            "kind": self.kind,
            "line_count": self.line_count,
            "content_digest": self.content_digest,
        }


@dataclass(frozen=True)
class SymbolRecord:
    name: str
    symbol_kind: str  # function | type | constant | other
    artifact_id: str
    span: LineRange
    signature_text: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "symbol_kind": self.symbol_kind,
            "artifact_id": self.artifact_id,
            "span": self.span.to_dict(),
            "signature_text": self.signature_text,
        }


@dataclass(frozen=True)
class EvidenceAnchor:
    """Resolvable (artifact, line-range) reference backing an explanation claim."""

    artifact_id: str
    span: LineRange
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "start": self.span.start,
            "end": self.span.end,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvidenceAnchor":
        return cls(
            artifact_id=doc["artifact_id"],
            span=LineRange(doc["start"], doc["end"]),
            label=doc.get("label", ""),
        )


@dataclass
class HitStats:
    distinct_hits: int
    total_hits: int
    spans: list[LineRange]


@dataclass
class RepoIndex:
    snapshot_id: str
    artifacts: tuple[ArtifactRecord, ...]
    symbols: tuple[SymbolRecord, ...]
    # token -> artifact_id -> sorted line numbers with >= 1 occurrence
    postings: dict[str, dict[str, tuple[int, ...]]]
    reference_edges: frozenset[tuple[str, str]]
    contents: ContentsProvider | None = None
    warnings: list[str] = field(default_factory=list)
    _by_id: dict[str, ArtifactRecord] = field(default_factory=dict, repr=False)
    _by_path: dict[str, ArtifactRecord] = field(default_factory=dict, repr=False)
    _symbols_by_artifact: dict[str, list[SymbolRecord]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._by_id = {a.artifact_id: a for a in self.artifacts}
        self._by_path = {a.path: a for a in self.artifacts}
        self._symbols_by_artifact = {}
        for sym in self.symbols:
            self._symbols_by_artifact.setdefault(sym.artifact_id, []).append(sym)

    def artifact_by_id(self, artifact_id: str) -> ArtifactRecord | None:
        return self._by_id.get(artifact_id)

    def artifact_by_path(self, path: str) -> ArtifactRecord | None:
        return self._by_path.get(path)

    def symbols_of(self, artifact_id: str) -> list[SymbolRecord]:
        return self._symbols_by_artifact.get(artifact_id, [])

    def text_of(self, artifact_id: str) -> str:
        record = self._by_id.get(artifact_id)
        if record is None:
            raise NotFoundError(f"unknown artifact {artifact_id!r}")
        if self.contents is None:
            raise NotFoundError("index has no contents provider attached")
        return self.contents(record.path)


def load_ignore_rules(root: str | Path, extra: Iterable[str] = ()) -> list[str]:
    """Merge default ignores, the root's .lensignore, and caller-supplied globs."""
    rules = list(DEFAULT_IGNORES)
    ignore_file = Path(root) / IGNORE_FILE_NAME
    if ignore_file.is_file():
        for line in ignore_file.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                rules.append(line)
    rules.extend(extra)
    return rules


def is_ignored(rel_path: str, rules: Iterable[str]) -> bool:
    parts = rel_path.split("/")
    for pattern in rules:
        if pattern.endswith("/"):
            dir_pattern = pattern[:-1]
            for i in range(1, len(parts)):
                if fnmatch("/".join(parts[:i]), dir_pattern) or fnmatch(parts[i - 1], dir_pattern):
                    return True
        elif fnmatch(rel_path, pattern):
            return True
        elif "/" not in pattern and any(fnmatch(part, pattern) for part in parts):
            return True
    return False


def _compute_snapshot_id(digests: Mapping[str, str]) -> str:
    acc = hashlib.sha256()
    for path in sorted(digests):
        acc.update(path.encode("utf-8"))
        acc.update(b"\x00")
        acc.update(digests[path].encode("ascii"))
        acc.update(b"\n")
    return acc.hexdigest()


# ---------------------------------------------------------------------------
# Symbol extraction
# ---------------------------------------------------------------------------


def _python_symbols(artifact: ArtifactRecord, contents: str) -> list[SymbolRecord] | None:
    import ast

    try:
        tree = ast.parse(contents)
    except (SyntaxError, ValueError):
        return None
    lines = contents.split("\n")

    def signature(lineno: int) -> str:
        return lines[lineno - 1].strip() if 0 < lineno <= len(lines) else ""

    records: list[SymbolRecord] = []
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            kind = "function"
        elif isinstance(node, ast.ClassDef):
            kind = "type"
        else:
            continue
        end = node.end_lineno or node.lineno
        records.append(
            SymbolRecord(
                name=node.name,
                symbol_kind=kind,
                artifact_id=artifact.artifact_id,
                span=LineRange(node.lineno, max(node.lineno, end)),
                signature_text=signature(node.lineno),
            )
        )
    for node in tree.body:
        targets = []
        if isinstance(node, ast.Assign):
            targets = [t for t in node.targets if isinstance(t, ast.Name)]
        elif isinstance(node, ast.AnnAssign) and isinstance(node.target, ast.Name):
            targets = [node.target]
        for target in targets:
            if target.id.isupper():
                end = node.end_lineno or node.lineno
                records.append(
                    SymbolRecord(
                        name=target.id,
                        symbol_kind="constant",
                        artifact_id=artifact.artifact_id,
                        span=LineRange(node.lineno, max(node.lineno, end)),
                        signature_text=signature(node.lineno),
                    )
                )
    records.sort(key=lambda r: (r.span.start, r.name))
    return records


def _block_end_by_indent(lines: list[str], def_index: int) -> int:
    def_indent = len(lines[def_index]) - len(lines[def_index].lstrip())
    end = def_index
    for i in range(def_index + 1, len(lines)):
        stripped = lines[i].strip()
        if not stripped:
            continue
        indent = len(lines[i]) - len(lines[i].lstrip())
        if indent <= def_indent:
            break
        end = i
    return end


def _block_end_by_braces(lines: list[str], def_index: int) -> int | None:
    depth = 0
    opened = False
    for i in range(def_index, len(lines)):
        if i > def_index + 1 and not opened:
            return None
        for ch in lines[i]:
            if ch == "{":
                depth += 1
                opened = True
            elif ch == "}":
                depth -= 1
                if opened and depth <= 0:
                    return i
    return len(lines) - 1 if opened else None


def _heuristic_symbols(artifact: ArtifactRecord, contents: str) -> list[SymbolRecord]:
    table = _DEFINITION_KEYWORDS.get(extension_of(artifact.path))
    if not table:
        return []
    lines = contents.split("\n")
    records: list[SymbolRecord] = []
    for i, line in enumerate(lines):
        if not line or line[0].isspace():
            continue
        tokens = _IDENT_TOKEN.findall(line)
        position = 0
        while position < len(tokens) and tokens[position] in _DEFINITION_MODIFIERS:
            position += 1
        if position >= len(tokens) or tokens[position] not in table:
            continue
        keyword = tokens[position]
        if position + 1 >= len(tokens):
            continue
        name = tokens[position + 1]
        # go methods: `func (r *T) Name(...)` -- take the token after the receiver
        if keyword == "func" and "(" in line and line.index("(") < line.index(name):
            close = line.find(")")
            if close != -1:
                rest = _IDENT_TOKEN.findall(line[close + 1 :])
                if rest:
                    name = rest[0]
                else:
                    continue
        end = _block_end_by_braces(lines, i)
        if end is None:
            end = _block_end_by_indent(lines, i)
        records.append(
            SymbolRecord(
                name=name,
                symbol_kind=table[keyword],
                artifact_id=artifact.artifact_id,
                span=LineRange(i + 1, max(i + 1, end + 1)),
                signature_text=line.strip(),
            )
        )
    return records


def extract_symbols(artifact: ArtifactRecord, contents: str) -> list[SymbolRecord]:
    """Symbols defined in a source artifact.

    Python files go through the syntax-aware extractor; everything else uses
    the line-heuristic fallback (definition keyword at line start).  Failure
    to parse yields an empty list, never an exception.
    """
    if artifact.kind != "source":
        raise ContractError(f"extract_symbols requires a source artifact, got {artifact.kind}")
    if extension_of(artifact.path) in (".py", ".pyi"):
        records = _python_symbols(artifact, contents)
        if records is None:
            logger.warning("syntax-aware extraction failed for %s; no symbols", artifact.path)
            return []
        return records
    return _heuristic_symbols(artifact, contents)


# ---------------------------------------------------------------------------
# Reference edges (import/include line patterns; no build-system resolution)
# ---------------------------------------------------------------------------

_PY_IMPORT = re.compile(r"^\s*import\s+([\w.]+(?:\s*,\s*[\w.]+)*)", re.MULTILINE)
_PY_FROM = re.compile(r"^\s*from\s+(\.*)([\w.]*)\s+import\s+([\w.*, ()]+)", re.MULTILINE)
_JS_IMPORT = re.compile(r"""(?:from|import|require\s*\()\s*['"]([^'"]+)['"]""")
_C_INCLUDE = re.compile(r"^\s*#\s*include\s+\"([^\"]+)\"", re.MULTILINE)

_JS_RESOLUTION_SUFFIXES = ("", ".ts", ".tsx", ".js", ".jsx", ".mjs", ".cjs",
                           "/index.ts", "/index.tsx", "/index.js", "/index.jsx")


def _normalize_relative(base_dir: str, specifier: str) -> str | None:
    parts = (base_dir.split("/") if base_dir else []) + specifier.split("/")
    out: list[str] = []
    for part in parts:
        if part in ("", "."):
            continue
        if part == "..":
            if not out:
                return None
            out.pop()
        else:
            out.append(part)
    return "/".join(out)


def _python_edge_targets(path: str, contents: str) -> list[str]:
    base_dir = path.rsplit("/", 1)[0] if "/" in path else ""
    targets: list[str] = []

    def module_candidates(module: str, anchor_dir: str | None) -> list[str]:
        rel = module.replace(".", "/")
        roots = [anchor_dir] if anchor_dir is not None else [None]
        out = []
        for root in roots:
            prefix = f"{root}/" if root else ""
            out.append(f"{prefix}{rel}.py")
            out.append(f"{prefix}{rel}/__init__.py")
        return out

    for match in _PY_IMPORT.finditer(contents):
        for module in re.split(r"\s*,\s*", match.group(1)):
            targets.extend(module_candidates(module.strip(), None))
    for match in _PY_FROM.finditer(contents):
        dots, module, names = match.groups()
        if not dots:
            targets.extend(module_candidates(module, None))
            continue
        anchor = base_dir.split("/") if base_dir else []
        for _ in range(len(dots) - 1):
            if not anchor:
                anchor = None
                break
            anchor.pop()
        if anchor is None:
            continue
        anchor_dir = "/".join(anchor)
        if module:
            targets.extend(module_candidates(module, anchor_dir))
        else:
            for name in re.split(r"\s*,\s*", names.strip().strip("()")):
                name = name.split(" as ")[0].strip()
                if name and name != "*":
                    targets.extend(module_candidates(name, anchor_dir))
    return targets


def _js_edge_targets(path: str, contents: str) -> list[str]:
    base_dir = path.rsplit("/", 1)[0] if "/" in path else ""
    targets: list[str] = []
    for match in _JS_IMPORT.finditer(contents):
        specifier = match.group(1)
        if not specifier.startswith("."):
            continue
        resolved = _normalize_relative(base_dir, specifier)
        if resolved is None:
            continue
        targets.extend(resolved + suffix for suffix in _JS_RESOLUTION_SUFFIXES)
    return targets


def _c_edge_targets(path: str, contents: str) -> list[str]:
    base_dir = path.rsplit("/", 1)[0] if "/" in path else ""
    targets: list[str] = []
    for match in _C_INCLUDE.finditer(contents):
        specifier = match.group(1)
        local = _normalize_relative(base_dir, specifier)
        if local is not None:
            targets.append(local)
        targets.append(specifier)
    return targets


def _edge_targets(path: str, contents: str) -> list[str]:
    ext = extension_of(path)
    if ext in (".py", ".pyi"):
        return _python_edge_targets(path, contents)
    if ext in (".js", ".jsx", ".mjs", ".cjs", ".ts", ".tsx"):
        return _js_edge_targets(path, contents)
    if ext in (".c", ".h", ".cpp", ".hpp", ".cc"):
        return _c_edge_targets(path, contents)
    return []


# ---------------------------------------------------------------------------
# Index construction
# ---------------------------------------------------------------------------


def index_file_map(
    files: Mapping[str, str],
    kind_overrides: Mapping[str, str] | None = None,
    warnings: list[str] | None = None,
) -> RepoIndex:
    """Build a RepoIndex over an in-memory {path: text} map.

    This is the single construction path; scan_repository feeds it from disk
    and session snapshots feed it from a replayed overlay.
    """
    paths = sorted(files)
    artifacts: list[ArtifactRecord] = []
    digests: dict[str, str] = {}
    id_to_path: dict[str, str] = {}
    for path in paths:
        text = files[path]
        artifact_id = artifact_id_for_path(path)
        if artifact_id in id_to_path:
            raise ValueError(f"artifact id collision: {id_to_path[artifact_id]!r} vs {path!r}")
        id_to_path[artifact_id] = path
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        digests[path] = digest
        artifacts.append(
            ArtifactRecord(
                artifact_id=artifact_id,
                path=path,
                kind=classify_kind(path, kind_overrides),
                line_count=len(split_lines(text)),
                content_digest=digest,
            )
        )

    symbols: list[SymbolRecord] = []
    postings: dict[str, dict[str, list[int]]] = {}
    edges: set[tuple[str, str]] = set()
    for artifact in artifacts:
        text = files[artifact.path]
        if artifact.kind == "source":
            symbols.extend(extract_symbols(artifact, text))
        stoplist = stoplist_for(artifact.path)
        for line_no, line in enumerate(split_lines(text), start=1):
            for token in set(tokenize_text(line, stoplist)):
                postings.setdefault(token, {}).setdefault(artifact.artifact_id, []).append(line_no)
        # Edges to empty files are suppressed: an empty artifact defines
        # nothing and cannot carry an evidence anchor.
        for target in _edge_targets(artifact.path, text):
            if target in files and target != artifact.path and files[target] != "":
                edges.add((artifact.artifact_id, artifact_id_for_path(target)))

    frozen_postings = {
        token: {aid: tuple(lines) for aid, lines in sorted(by_artifact.items())}
        for token, by_artifact in sorted(postings.items())
    }
    index = RepoIndex(
        snapshot_id=_compute_snapshot_id(digests),
        artifacts=tuple(artifacts),
        symbols=tuple(symbols),
        postings=frozen_postings,
        reference_edges=frozenset(edges),
        contents=lambda path, _files=dict(files): _files[path],
        warnings=warnings if warnings is not None else [],
    )
    return index


def read_tree(
    root: str | Path, ignore_rules: Iterable[str] | None = None
) -> tuple[dict[str, str], list[str]]:
    """Read every non-ignored text file under ``root`` into a {path: text} map.

    Unreadable or binary files are skipped with a recorded warning; an
    unreadable root raises IOError.
    """
    root = Path(root)
    if not root.is_dir():
        raise IOError(f"repository root {root} is not a readable directory")
    rules = load_ignore_rules(root, ignore_rules or ())
    files: dict[str, str] = {}
    warnings: list[str] = []
    for entry in sorted(root.rglob("*")):
        if not entry.is_file():
            continue
        rel = entry.relative_to(root).as_posix()
        if is_ignored(rel, rules):
            continue
        try:
            raw = entry.read_bytes()
        except OSError as exc:
            warnings.append(f"skipped unreadable file {rel}: {exc}")
            continue
        if b"\x00" in raw:
            warnings.append(f"skipped binary file {rel}")
            continue
        try:
            files[rel] = raw.decode("utf-8")
        except UnicodeDecodeError:
            warnings.append(f"skipped non-UTF-8 file {rel}")
            continue
    for warning in warnings:
        logger.warning("%s", warning)
    return files, warnings


def scan_repository(
    root: str | Path,
    ignore_rules: Iterable[str] | None = None,
    kind_overrides: Mapping[str, str] | None = None,
) -> RepoIndex:
    """Index every non-ignored text file under ``root``."""
    files, warnings = read_tree(root, ignore_rules)
    return index_file_map(files, kind_overrides, warnings=warnings)


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def resolve_anchor(index: RepoIndex, anchor: EvidenceAnchor) -> str:
    """Exact text slice [start, end] (inclusive) behind an anchor."""
    record = index.artifact_by_id(anchor.artifact_id)
    if record is None:
        raise NotFoundError(f"unknown artifact {anchor.artifact_id!r}")
    if anchor.span.end > record.line_count:
        raise RangeError(
            f"anchor range {anchor.span.start}..{anchor.span.end} exceeds "
            f"{record.path} ({record.line_count} lines)"
        )
    lines = split_lines(index.text_of(anchor.artifact_id))
    return "".join(lines[anchor.span.start - 1 : anchor.span.end])


def query_postings(index: RepoIndex, tokens: Iterable[str]) -> dict[str, HitStats]:
    """Inverted-index lookup for a token multiset.

    Hit granularity is per line: total_hits counts (token, line) pairs with
    at least one occurrence.  Artifacts with no hits are omitted.
    """
    distinct: dict[str, set[str]] = {}
    lines_hit: dict[str, set[int]] = {}
    totals: dict[str, int] = {}
    for token in set(tokens):
        for artifact_id, line_nos in index.postings.get(token, {}).items():
            distinct.setdefault(artifact_id, set()).add(token)
            lines_hit.setdefault(artifact_id, set()).update(line_nos)
            totals[artifact_id] = totals.get(artifact_id, 0) + len(line_nos)
    return {
        artifact_id: HitStats(
            distinct_hits=len(distinct[artifact_id]),
            total_hits=totals[artifact_id],
            spans=[LineRange(n, n) for n in sorted(lines_hit[artifact_id])],
        )
        for artifact_id in sorted(totals)
    }


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def index_to_dict(index: RepoIndex) -> dict:
    return {
        "version": INDEX_FORMAT_VERSION,
        "snapshot_id": index.snapshot_id,
        "artifacts": [a.to_dict() for a in index.artifacts],
        "symbols": [s.to_dict() for s in index.symbols],
        "postings": {
            token: {aid: list(lines) for aid, lines in by_artifact.items()}
            for token, by_artifact in index.postings.items()
        },
        "reference_edges": sorted(list(edge) for edge in index.reference_edges),
    }


def index_from_dict(doc: dict, contents: ContentsProvider | None = None) -> RepoIndex:
    if doc.get("version") != INDEX_FORMAT_VERSION:
        raise ValueError(f"unsupported index version {doc.get('version')!r}")
    artifacts = tuple(
        ArtifactRecord(
            artifact_id=a["artifact_id"],
            path=a["path"],
            kind=a["kind"],
            line_count=a["line_count"],
            content_digest=a["content_digest"],
        )
        for a in doc["artifacts"]
    )
    symbols = tuple(
        SymbolRecord(
            name=s["name"],
            symbol_kind=s["symbol_kind"],
            artifact_id=s["artifact_id"],
            span=LineRange(s["span"]["start"], s["span"]["end"]),
            signature_text=s["signature_text"],
        )
        for s in doc["symbols"]
    )
    postings = {
        token: {aid: tuple(lines) for aid, lines in by_artifact.items()}
        for token, by_artifact in doc["postings"].items()
    }
    edges = frozenset((src, dst) for src, dst in doc["reference_edges"])
    return RepoIndex(
        snapshot_id=doc["snapshot_id"],
        artifacts=artifacts,
        symbols=symbols,
        postings=postings,
        reference_edges=edges,
        contents=contents,
    )
