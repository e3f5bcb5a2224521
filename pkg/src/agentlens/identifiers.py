"""Identifier scanning and tokenization.

One rule shared by session ingestion and the repository index: identifiers
are scanned as [A-Za-z_][A-Za-z0-9_]* words, keyword-stoplisted per file
extension, then split at underscores and lower-to-upper case boundaries and
lowercased.  Naming-convention analysis uses the raw (pre-split) identifiers
since case is the signal there.
"""
from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_PYTHON_KEYWORDS = frozenset(
    """False None True and as assert async await break class continue def del
    elif else except finally for from global if import in is lambda nonlocal
    not or pass raise return try while with yield match case self cls""".split()
)
_JS_KEYWORDS = frozenset(
    """break case catch class const continue debugger default delete do else
    export extends finally for function if import in instanceof let new null
    of return static super switch this throw true false try typeof undefined
    var void while with yield async await""".split()
)
_TS_KEYWORDS = _JS_KEYWORDS | frozenset(
    """abstract any as declare enum implements interface is keyof module
    namespace never private protected public readonly string number boolean
    type unknown""".split()
)
_GO_KEYWORDS = frozenset(
    """break case chan const continue default defer else fallthrough for func
    go goto if import interface map package range return select struct switch
    type var nil true false""".split()
)
_RUST_KEYWORDS = frozenset(
    """as async await break const continue crate dyn else enum extern false fn
    for if impl in let loop match mod move mut pub ref return self static
    struct super trait true type unsafe use where while""".split()
)
_C_KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern
    float for goto if inline int long register return short signed sizeof
    static struct switch typedef union unsigned void volatile while class
    namespace template typename public private protected virtual new delete
    this nullptr true false include define ifdef ifndef endif pragma""".split()
)
_JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for if implements
    import instanceof int interface long native new package private protected
    public return short static strictfp super switch synchronized this throw
    throws transient try void volatile while true false null var record""".split()
)
_RUBY_KEYWORDS = frozenset(
    """alias and begin break case class def defined do else elsif end ensure
    false for if in module next nil not or redo rescue retry return self super
    then true undef unless until when while yield require attr_accessor""".split()
)
_SHELL_KEYWORDS = frozenset(
    """if then else elif fi for while until do done case esac function in
    select time local export echo return exit set unset shift source""".split()
)

KEYWORDS_BY_EXTENSION: dict[str, frozenset[str]] = {
    ".py": _PYTHON_KEYWORDS,
    ".pyi": _PYTHON_KEYWORDS,
    ".js": _JS_KEYWORDS,
    ".jsx": _JS_KEYWORDS,
    ".mjs": _JS_KEYWORDS,
    ".cjs": _JS_KEYWORDS,
    ".ts": _TS_KEYWORDS,
    ".tsx": _TS_KEYWORDS,
    ".go": _GO_KEYWORDS,
    ".rs": _RUST_KEYWORDS,
    ".c": _C_KEYWORDS,
    ".h": _C_KEYWORDS,
    ".cpp": _C_KEYWORDS,
    ".hpp": _C_KEYWORDS,
    ".cc": _C_KEYWORDS,
    ".java": _JAVA_KEYWORDS,
    ".rb": _RUBY_KEYWORDS,
    ".sh": _SHELL_KEYWORDS,
    ".bash": _SHELL_KEYWORDS,
}


def extension_of(path: str) -> str:
    name = path.rsplit("/", 1)[-1]
    dot = name.rfind(".")
    return name[dot:].lower() if dot > 0 else ""


def stoplist_for(path: str) -> frozenset[str]:
    """Keyword stoplist for a path's extension; empty for unknown extensions."""
    return KEYWORDS_BY_EXTENSION.get(extension_of(path), frozenset())


def scan_identifiers(text: str) -> list[str]:
    """Raw identifier words in source order, unsplit and case-preserving."""
    return _IDENTIFIER.findall(text)


def split_identifier(name: str) -> list[str]:
    """Split one identifier at underscores and lower-to-upper boundaries.

    Parts come back lowercased; empty parts (from leading/trailing/double
    underscores) are dropped.  "fooBar" and "FOO_bar" both yield tokens.
    """
    parts: list[str] = []
    for chunk in name.split("_"):
        if not chunk:
            continue
        start = 0
        for i in range(1, len(chunk)):
            if chunk[i - 1].islower() and chunk[i].isupper():
                parts.append(chunk[start:i].lower())
                start = i
        parts.append(chunk[start:].lower())
    return parts


def tokenize_text(text: str, stoplist: frozenset[str] = frozenset()) -> Counter[str]:
    """Multiset of split tokens in ``text``, with keyword identifiers excluded."""
    tokens: Counter[str] = Counter()
    for ident in scan_identifiers(text):
        if ident in stoplist:
            continue
        tokens.update(split_identifier(ident))
    return tokens


def tokenize_lines(lines: Iterable[str], stoplist: frozenset[str] = frozenset()) -> Counter[str]:
    tokens: Counter[str] = Counter()
    for line in lines:
        tokens.update(tokenize_text(line, stoplist))
    return tokens
