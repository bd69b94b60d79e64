"""Batch entry points: validate files, run matching, emit layouts, serve, export.

Exit codes: 0 success, 1 domain diagnostics, 2 environment or usage problems.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .formats import (
    parse_corpus,
    parse_graph,
    parse_instance,
    parse_schema,
    serialize_graph,
    sniff_kind,
)
from .layout import ExpansionState, compute_layout, layout_to_obj
from .matcher import MatchConfig, match_graphs
from .model import Diagnostic, EngineError, has_errors, validate_graph
from .service import replay_session_dir


def _print_diags(diags: list[Diagnostic], source: str = "") -> None:
    prefix = f"{source}: " if source else ""
    for d in diags:
        click.echo(f"{prefix}{d.severity} {d.code} {d.subject}: {d.message}", err=True)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        click.echo(f"{path}: {exc.strerror or exc}", err=True)
        sys.exit(2)


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        click.echo(f"{path}: {exc.strerror or exc}", err=True)
        sys.exit(2)


def _check_tau(ctx, param, value: float) -> float:
    if not 0.0 < value <= 1.0:
        raise click.BadParameter("must be in (0, 1]")
    return value


@click.group()
def main() -> None:
    """Schema-guided event graph engine."""


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path())
def validate(paths: tuple[str, ...]) -> None:
    """Parse and structurally validate schema/instance/corpus/graph files.

    If exactly one corpus file is among PATHS, graph files are additionally
    checked against it (span text agreement, bounding boxes).
    """
    contents = {path: _read(path) for path in paths}
    kinds = {path: sniff_kind(data) for path, data in contents.items()}
    corpus = None
    corpus_paths = [p for p, k in kinds.items() if k == "corpus"]
    failed = False

    if len(corpus_paths) == 1:
        parsed = parse_corpus(contents[corpus_paths[0]])
        if isinstance(parsed, list):
            _print_diags(parsed, corpus_paths[0])
            failed = True
        else:
            corpus = parsed

    for path, data in contents.items():
        kind = kinds[path]
        if kind == "corpus":
            if corpus is None and len(corpus_paths) != 1:
                result = parse_corpus(data)
                if isinstance(result, list):
                    _print_diags(result, path)
                    failed = True
            continue
        parser = {"schema": parse_schema, "instance": parse_instance, "graph": parse_graph}.get(kind)
        if parser is None:
            click.echo(f"{path}: error SYNTAX document: unrecognized document", err=True)
            failed = True
            continue
        result = parser(data)
        if isinstance(result, list):
            _print_diags(result, path)
            failed = True
            continue
        if kind == "graph":
            report = validate_graph(result, corpus)
            _print_diags([d for d in report if d.severity == "error"], path)
            if has_errors(report):
                failed = True
        elif kind == "instance" and corpus is not None:
            from .provenance import check_instance

            report = check_instance(result, corpus)
            _print_diags([d for d in report if d.severity == "error"], path)
            if has_errors(report):
                failed = True
    sys.exit(1 if failed else 0)


@main.command()
@click.argument("schema_path", type=click.Path())
@click.argument("instance_path", type=click.Path())
@click.argument("out_path", type=click.Path())
@click.option("--tau", default=0.5, show_default=True, callback=_check_tau,
              help="Minimum score for accepting a schema/instance pair.")
def match(schema_path: str, instance_path: str, out_path: str, tau: float) -> None:
    """Instantiate SCHEMA_PATH with INSTANCE_PATH and write the graph to OUT_PATH."""
    schema = parse_schema(_read(schema_path))
    if isinstance(schema, list):
        _print_diags(schema, schema_path)
        sys.exit(1)
    instance = parse_instance(_read(instance_path))
    if isinstance(instance, list):
        _print_diags(instance, instance_path)
        sys.exit(1)
    try:
        result = match_graphs(schema, instance, MatchConfig(tau=tau))
    except EngineError as exc:
        _print_diags([exc.as_diagnostic()], schema_path)
        sys.exit(1)
    _write(out_path, serialize_graph(result.graph))


@main.command()
@click.argument("graph_path", type=click.Path())
@click.option("--expand", default="", help="Comma-separated parent ids, or 'all'.")
@click.option("--out", "out_path", default="-", help="Output path; '-' for stdout.")
def layout(graph_path: str, expand: str, out_path: str) -> None:
    """Compute the panel layout for an instantiated-graph file."""
    import json as _json

    g = parse_graph(_read(graph_path))
    if isinstance(g, list):
        _print_diags(g, graph_path)
        sys.exit(1)
    parents = {ev.id for ev in g.events.values() if ev.children}
    expanded = parents if expand == "all" else ({e for e in expand.split(",") if e} & parents)
    try:
        result = compute_layout(g, ExpansionState(frozenset(expanded)))
    except EngineError as exc:
        _print_diags([exc.as_diagnostic()], graph_path)
        sys.exit(1)
    data = (_json.dumps(layout_to_obj(result), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if out_path == "-":
        click.echo(data.decode("utf-8"), nl=False)
    else:
        _write(out_path, data)


@main.command()
@click.option("--port", default=8722, show_default=True, help="Port to bind.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", envvar="EGE_DATA_DIR", default=None, type=click.Path(),
              help="Directory for session persistence (env: EGE_DATA_DIR).")
def serve(port: int, host: str, data_dir: str | None) -> None:
    """Run the session service."""
    import uvicorn

    from .service import create_app

    try:
        app = create_app(data_dir)
    except EngineError as exc:
        _print_diags([exc.as_diagnostic()])
        sys.exit(1)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        click.echo(f"cannot bind {host}:{port}: {exc.strerror or exc}", err=True)
        sys.exit(2)


@main.command()
@click.argument("session_dir", type=click.Path())
@click.argument("out_path", type=click.Path())
def export(session_dir: str, out_path: str) -> None:
    """Replay a persisted session's op log and write its current graph."""
    if not Path(session_dir).is_dir():
        click.echo(f"{session_dir}: not a session directory", err=True)
        sys.exit(2)
    try:
        sess = replay_session_dir(session_dir)
    except EngineError as exc:
        _print_diags([exc.as_diagnostic()], session_dir)
        sys.exit(1)
    except (OSError, KeyError, ValueError) as exc:
        click.echo(f"{session_dir}: cannot read session: {exc}", err=True)
        sys.exit(2)
    _write(out_path, serialize_graph(sess.graph))


if __name__ == "__main__":
    main()
