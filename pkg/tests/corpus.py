"""Seeded random corpora shared by property tests and the acceptance suite."""
from __future__ import annotations

import random

_WORDS = (
    "alpha beta gamma delta epsilon zeta theta kappa sigma omega parse build "
    "load save fetch store cache index token symbol anchor record session "
    "config handler worker queue stream buffer client server router matrix"
).split()

_LINE_SHAPES = (
    "def {a}_{b}():",
    "    return {a}({b})",
    "{a}_{b} = {c}_{d}()",
    "class {A}{B}:",
    "    {a} = '{b}'",
    "# {a} {b} {c}",
    "print({a}, {b})",
    "",
    "for {a} in {b}_{c}:",
    "    {a}.append({b})",
)


def _word(rng: random.Random) -> str:
    return rng.choice(_WORDS)


def random_line(rng: random.Random) -> str:
    shape = rng.choice(_LINE_SHAPES)
    a, b, c, d = (_word(rng) for _ in range(4))
    return shape.format(a=a, b=b, c=c, d=d, A=a.capitalize(), B=b.capitalize())


def random_text(rng: random.Random, max_lines: int = 500) -> str:
    count = rng.randint(0, max_lines)
    lines = [random_line(rng) for _ in range(count)]
    text = "\n".join(lines)
    if lines and rng.random() < 0.85:
        text += "\n"
    if rng.random() < 0.05:
        text = text.replace("print", "pri\rnt", 1)
    return text


def mutate_text(rng: random.Random, text: str, max_lines: int = 500) -> str:
    """A plausible post-image: insert/delete/replace random line runs."""
    lines = text.split("\n")
    if text.endswith("\n"):
        lines = lines[:-1]
        trailing = True
    else:
        trailing = text != ""
    edits = rng.randint(1, 6)
    for _ in range(edits):
        action = rng.choice(("insert", "delete", "replace"))
        at = rng.randint(0, max(0, len(lines)))
        run = rng.randint(1, 4)
        if action == "insert" and len(lines) + run <= max_lines:
            lines[at:at] = [random_line(rng) for _ in range(run)]
        elif action == "delete" and lines:
            del lines[at : at + run]
        elif action == "replace" and lines:
            end = min(len(lines), at + run)
            lines[at:end] = [random_line(rng) for _ in range(rng.randint(0, run + 1))]
    if rng.random() < 0.1:
        trailing = not trailing
    if not lines:
        return ""
    return "\n".join(lines) + ("\n" if trailing else "")


def random_repo(rng: random.Random, max_files: int = 50) -> dict[str, str]:
    """Synthetic repository: sources, docs, and configs in nested dirs."""
    dirs = ("", "app/", "app/core/", "lib/", "docs/", "tests/")
    count = rng.randint(2, max_files)
    files: dict[str, str] = {}
    names = set()
    for _ in range(count):
        directory = rng.choice(dirs)
        ext = rng.choice((".py", ".py", ".py", ".js", ".md", ".txt", ".json"))
        stem = f"{_word(rng)}_{_word(rng)}{rng.randint(0, 99)}"
        path = f"{directory}{stem}{ext}"
        if path in names:
            continue
        names.add(path)
        if ext == ".json":
            files[path] = '{"%s": "%s"}\n' % (_word(rng), _word(rng))
        elif ext in (".md", ".txt"):
            line_count = rng.randint(1, 8)
            files[path] = "\n".join(
                f"The {_word(rng)}_{_word(rng)} helper does {_word(rng)}." for _ in range(line_count)
            ) + "\n"
        else:
            files[path] = random_text(rng, max_lines=30)
    # Sprinkle a few imports so reference edges exist.
    py_files = [p for p in files if p.endswith(".py")]
    for path in py_files:
        if rng.random() < 0.4 and len(py_files) > 1:
            other = rng.choice([p for p in py_files if p != path])
            module = other[:-3].replace("/", ".")
            files[path] = f"import {module}\n" + files[path]
    return files
