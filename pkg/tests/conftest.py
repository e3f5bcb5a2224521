from __future__ import annotations

import json
from pathlib import Path

import pytest

from agentlens.diffs import make_unified_diff


def write_tree(root: Path, files: dict[str, str]) -> Path:
    for rel, text in files.items():
        target = root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    return root


def session_log(
    session_id: str,
    repo_root: str,
    events: list[dict],
    task_prompt: str = "do the task",
) -> bytes:
    return json.dumps(
        {
            "session_id": session_id,
            "task_prompt": task_prompt,
            "repo_root": repo_root,
            "events": events,
        }
    ).encode("utf-8")


def edit_event(seq: int, path: str, pre: str, post: str, kind: str = "file_edit") -> dict:
    return {"seq": seq, "kind": kind, "path": path, "diff": make_unified_diff(pre, post)}


@pytest.fixture
def repo(tmp_path: Path) -> Path:
    root = tmp_path / "repo"
    root.mkdir()
    return root
