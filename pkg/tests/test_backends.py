from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from agentlens.backends import (
    BackendConfig,
    RemoteBackend,
    TemplateBackend,
    make_backend,
)
from agentlens.errors import GenerationError, ValidationError


def card_prompt(kind: str = "modified", added: int = 5, removed: int = 2, hunks: int = 1) -> dict:
    return {
        "intent": "level1_card",
        "task_prompt": "",
        "modification": {
            "path": "a.py",
            "kind": kind,
            "order_index": 0,
            "added_lines": added,
            "removed_lines": removed,
            "post_symbols": [],
            "hunks": [{"pre_start": 1, "pre_len": 1, "post_start": 1, "post_len": 1, "lines": []}]
            * hunks,
        },
    }


class TestTemplateBackend:
    def test_title_verbs(self):
        backend = TemplateBackend()
        assert backend.generate(card_prompt("created"), {})["title"] == "Create a.py"
        assert backend.generate(card_prompt("modified"), {})["title"] == "Update a.py"
        assert backend.generate(card_prompt("deleted"), {})["title"] == "Delete a.py"

    @pytest.mark.parametrize(
        "kind,added,removed,expected",
        [
            ("created", 1, 0, "high"),
            ("modified", 25, 5, "high"),
            ("modified", 2, 1, "low"),
            ("modified", 10, 2, "medium"),
            ("deleted", 0, 3, "low"),
            ("deleted", 0, 31, "high"),
        ],
    )
    def test_significance_thresholds(self, kind, added, removed, expected):
        backend = TemplateBackend()
        out = backend.generate(card_prompt(kind, added, removed), {})
        assert out["significance"] == expected

    def test_unknown_intent_rejected(self):
        with pytest.raises(GenerationError):
            TemplateBackend().generate({"intent": "poetry"}, {})

    def test_conditional_chain_needs_two_branches(self):
        def level2_prompt(lines: list[str]) -> dict:
            return {
                "intent": "level2_document",
                "task_prompt": "",
                "influences": [],
                "modification": {
                    "path": "a.py",
                    "kind": "modified",
                    "hunks": [
                        {
                            "pre_start": 1,
                            "pre_len": 0,
                            "post_start": 1,
                            "post_len": len(lines),
                            "lines": [f"+{line}" for line in lines],
                        }
                    ],
                },
            }

        backend = TemplateBackend()
        single = backend.generate(level2_prompt(["elif x:"]), {})
        assert "dispatch table" not in single["alternatives"][0]["title"]
        double = backend.generate(level2_prompt(["elif x:", "elif y:"]), {})
        assert "dispatch table" in double["alternatives"][0]["title"]


class _CannedHandler(BaseHTTPRequestHandler):
    canned: dict = {}
    status = 200
    seen: list[dict] = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        _CannedHandler.seen.append(json.loads(self.rfile.read(length)))
        body = json.dumps(self.canned).encode()
        self.send_response(self.status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def canned_server():
    server = HTTPServer(("127.0.0.1", 0), _CannedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _CannedHandler.seen = []
    try:
        yield f"http://127.0.0.1:{server.server_port}/generate"
    finally:
        server.shutdown()


class TestRemoteBackend:
    def test_forwards_prompt_and_schema(self, canned_server):
        _CannedHandler.canned = {"title": "T", "significance": "low", "summary": "S"}
        _CannedHandler.status = 200
        backend = RemoteBackend(endpoint=canned_server, model="m1")
        out = backend.generate({"intent": "level1_card"}, {"type": "object"})
        assert out == {"title": "T", "significance": "low", "summary": "S"}
        sent = _CannedHandler.seen[-1]
        assert sent["model"] == "m1"
        assert sent["prompt"]["intent"] == "level1_card"
        assert sent["schema"] == {"type": "object"}

    def test_http_failure_is_generation_error(self, canned_server):
        _CannedHandler.canned = {"error": "nope"}
        _CannedHandler.status = 500
        backend = RemoteBackend(endpoint=canned_server)
        with pytest.raises(GenerationError):
            backend.generate({}, {})

    def test_requires_endpoint(self):
        with pytest.raises(ValidationError):
            RemoteBackend(endpoint="")


class TestBackendConfig:
    def test_defaults(self):
        config = BackendConfig.from_dict({})
        assert config.backend == "template"
        assert config.budget == 4000
        assert config.max_repairs == 2
        assert isinstance(make_backend(config), TemplateBackend)

    def test_from_file(self, tmp_path):
        path = tmp_path / "backend.json"
        path.write_text(
            json.dumps(
                {
                    "backend": "remote",
                    "endpoint": "http://127.0.0.1:1/x",
                    "model": "m",
                    "budget": 900,
                    "max_repairs": 1,
                }
            )
        )
        config = BackendConfig.from_file(path)
        assert config.backend == "remote"
        assert config.budget == 900
        backend = make_backend(config)
        assert isinstance(backend, RemoteBackend)
        assert backend.model == "m"

    def test_rejects_unknown_backend(self):
        with pytest.raises(ValidationError):
            BackendConfig.from_dict({"backend": "oracle"})

    def test_rejects_bad_budget(self):
        with pytest.raises(ValidationError):
            BackendConfig.from_dict({"budget": 0})
