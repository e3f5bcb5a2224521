"""Command-line entry points: index, ingest, explain, serve.

The CLI is a thin shell over the library: argument handling, JSON in/out,
and exit-code mapping only.  Machine-readable output goes to stdout; errors
are emitted as one JSON object on stderr.  Exit codes: 0 success, 1 usage or
input error, 2 environment/IO error.
"""
from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click

from agentlens.backends import BackendConfig, make_backend
from agentlens.errors import LensError
from agentlens.pipeline import (
    analyze_session_log,
    enrich_timeline,
    level1_document,
    level2_document,
)
from agentlens.repo_index import index_to_dict, scan_repository
from agentlens.schemas import canonical_json
from agentlens.session import parse_session_log, replay_session


def _emit(document, pretty: bool) -> None:
    if pretty:
        click.echo(json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        sys.stdout.write(canonical_json(document).decode("utf-8") + "\n")


def _load_backend(name: str, config_path: str | None) -> tuple[BackendConfig, object]:
    if config_path:
        config = BackendConfig.from_file(config_path)
    else:
        config = BackendConfig(backend=name)
    if name and config.backend != name:
        config = BackendConfig(
            backend=name,
            endpoint=config.endpoint,
            model=config.model,
            budget=config.budget,
            max_repairs=config.max_repairs,
        )
    return config, make_backend(config)


@click.group()
def cli() -> None:
    """Explain completed AI coding-agent sessions against their repository."""


@cli.command("index")
@click.option("--repo", required=True, type=click.Path(), help="Repository root to scan.")
@click.option("--out", required=True, type=click.Path(), help="Where to write the index document.")
@click.option("--ignore", multiple=True, help="Extra ignore glob (repeatable).")
@click.option("--pretty", is_flag=True, default=False, help="Indent the JSON output.")
def index_command(repo: str, out: str, ignore: tuple[str, ...], pretty: bool) -> None:
    """Scan a repository and write its serialized index."""
    index = scan_repository(repo, ignore)
    document = index_to_dict(index)
    data = (
        json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False).encode("utf-8")
        if pretty
        else canonical_json(document)
    )
    Path(out).write_bytes(data)
    click.echo(index.snapshot_id)


@cli.command("ingest")
@click.option("--session", "session_path", required=True, type=click.Path(), help="Session log file.")
@click.option("--repo", type=click.Path(), default=None, help="Repository root (defaults to the log's repo_root).")
@click.option("--pretty", is_flag=True, default=False)
def ingest_command(session_path: str, repo: str | None, pretty: bool) -> None:
    """Parse a session log and print its modification timeline."""
    session = parse_session_log(Path(session_path).read_bytes())
    replay = replay_session(session, repo)
    timeline = enrich_timeline(replay)
    _emit(
        {
            "session_id": session.session_id,
            "task_prompt": session.task_prompt,
            "modifications": [mod.to_dict() for mod in timeline],
        },
        pretty,
    )


@cli.command("explain")
@click.option("--session", "session_path", required=True, type=click.Path(), help="Session log file.")
@click.option("--repo", type=click.Path(), default=None, help="Repository root (defaults to the log's repo_root).")
@click.option("--level", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--change", type=int, default=None, help="Modification index (required for --level 2).")
@click.option("--backend", type=click.Choice(["template", "remote"]), default="template", show_default=True)
@click.option("--backend-config", type=click.Path(), default=None, help="Backend configuration JSON file.")
@click.option("--pretty", is_flag=True, default=False)
def explain_command(
    session_path: str,
    repo: str | None,
    level: int,
    change: int | None,
    backend: str,
    backend_config: str | None,
    pretty: bool,
) -> None:
    """Print a Level 1 or Level 2 explanation document."""
    if level == 2 and change is None:
        raise click.UsageError("--level 2 requires --change")
    config, generation_backend = _load_backend(backend, backend_config)
    analysis = analyze_session_log(Path(session_path).read_bytes(), repo)
    if level == 1:
        document = level1_document(analysis, generation_backend)
    else:
        assert change is not None
        document = level2_document(
            analysis,
            change,
            generation_backend,
            budget=config.budget,
            max_repairs=config.max_repairs,
        )
    _emit(document, pretty)


@cli.command("serve")
@click.option("--port", type=int, default=8400, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store-dir", type=click.Path(), default=".lens-store", show_default=True)
@click.option("--backend-config", type=click.Path(), default=None)
@click.option("--panel-dir", type=click.Path(), default=None, help="Static panel build to mount at /panel.")
def serve_command(
    port: int, host: str, store_dir: str, backend_config: str | None, panel_dir: str | None
) -> None:
    """Run the explanation service until signalled."""
    import signal
    import threading

    import uvicorn

    from agentlens.service import ServiceConfig, create_app

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise OSError(f"port {port} is not available: {exc}") from exc
    finally:
        probe.close()

    backend = BackendConfig.from_file(backend_config) if backend_config else BackendConfig()
    config = ServiceConfig(port=port, store_dir=store_dir, backend=backend, panel_dir=panel_dir)
    app = create_app(config)
    server = uvicorn.Server(uvicorn.Config(app, host=host, port=port, log_level="warning"))

    # Run the server off the main thread so SIGTERM/SIGINT stay ours and a
    # signalled stop still exits 0 after a graceful drain.
    worker = threading.Thread(target=server.run, daemon=True)
    worker.start()

    def request_stop(_signum, _frame):
        server.should_exit = True

    signal.signal(signal.SIGTERM, request_stop)
    signal.signal(signal.SIGINT, request_stop)
    while worker.is_alive():
        worker.join(timeout=0.2)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="LENS")
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        sys.stderr.write(
            json.dumps({"error": {"type": "UsageError", "message": exc.format_message()}}) + "\n"
        )
        return 1
    except LensError as exc:
        sys.stderr.write(json.dumps({"error": exc.to_dict()}) + "\n")
        return 1
    except OSError as exc:
        sys.stderr.write(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
