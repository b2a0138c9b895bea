"""Command-line interface.

Verbs: load (register a file with an inferred schema), query (run SQL and
print the result), run (execute an XML-configured pipeline), analyze
(refresh persisted statistics), serve (start the HTTP service).

Exit codes: 0 success, 1 user error, 2 internal error. The data directory
defaults to $HMDAP_DATA_DIR when --data-dir is not given.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .engine import DATA_DIR_ENV, Engine, default_workers
from .errors import EngineError
from .export import format_value, relation_to_csv
from .model import Relation
from .pipeline import execute_pipeline, parse_db_config, parse_ml_config


def format_table(relation: Relation, limit: int | None = None) -> str:
    names = relation.schema.names()
    rows = relation.all_rows()
    shown = rows if limit is None else rows[:limit]
    cells = [[format_value(v) for v in row] for row in shown]
    widths = [len(n) for n in names]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    header = " | ".join(n.ljust(w) for n, w in zip(names, widths))
    rule = "-+-".join("-" * w for w in widths)
    lines = [header, rule]
    for row in cells:
        lines.append(" | ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    if limit is not None and len(rows) > limit:
        lines.append(f"... ({len(rows)} rows total)")
    else:
        lines.append(f"({len(rows)} rows)")
    return "\n".join(lines)


def _data_dir(args) -> Path:
    if args.data_dir:
        return Path(args.data_dir)
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    raise EngineError(f"no data directory: pass --data-dir or set {DATA_DIR_ENV}")


def _add_data_dir(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data-dir", help=f"data directory (default: ${DATA_DIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyquery", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_load = sub.add_parser("load", help="register a delimited file as a table")
    p_load.add_argument("name")
    p_load.add_argument("path")
    p_load.add_argument("--delimiter", default=",")
    p_load.add_argument("--no-header", action="store_true", help="file has no header row")
    p_load.add_argument("--sample-rows", type=int, default=1000)
    _add_data_dir(p_load)

    p_query = sub.add_parser("query", help="run a SQL query and print the result")
    p_query.add_argument("sql")
    p_query.add_argument("--workers", type=int, default=None)
    p_query.add_argument("--csv", action="store_true", help="print CSV instead of a table")
    _add_data_dir(p_query)

    p_run = sub.add_parser("run", help="execute a pipeline from two XML config files")
    p_run.add_argument("--ml-config", required=True)
    p_run.add_argument("--db-config", required=True)
    p_run.add_argument("--output", help="also write the result as CSV to this path")
    p_run.add_argument("--workers", type=int, default=None)
    _add_data_dir(p_run)

    p_analyze = sub.add_parser("analyze", help="collect and persist table statistics")
    p_analyze.add_argument("table")
    p_analyze.add_argument("--seed", type=int, default=0)
    _add_data_dir(p_analyze)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--workers", type=int, default=None)
    p_serve.add_argument("--page-size", type=int, default=1000,
                         help="max result rows in pipeline status responses")
    p_serve.add_argument("--frontend", help="directory with the built web console")
    _add_data_dir(p_serve)
    return parser


def cmd_load(args) -> int:
    engine = Engine(_data_dir(args))
    entry = engine.load_table(
        args.name,
        args.path,
        delimiter=args.delimiter,
        has_header=not args.no_header,
        sample_rows=args.sample_rows,
    )
    cols = ", ".join(f"{c.name}:{c.ctype.value}" for c in entry.schema.columns)
    print(f"registered {entry.table_name} ({cols})")
    return 0


def cmd_query(args) -> int:
    engine = Engine(_data_dir(args), workers=args.workers)
    relation = engine.query(args.sql)
    if args.csv:
        sys.stdout.write(relation_to_csv(relation))
    else:
        print(format_table(relation))
    return 0


def cmd_run(args) -> int:
    ml_path = Path(args.ml_config)
    db_path = Path(args.db_config)
    try:
        ml_text = ml_path.read_text(encoding="utf-8")
        db_text = db_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EngineError(f"cannot read config: {exc}") from exc
    cfg = parse_ml_config(ml_text)
    db = parse_db_config(db_text)
    if args.data_dir or os.environ.get(DATA_DIR_ENV):
        data_dir = _data_dir(args)
    else:
        # local:<dir> resolves relative to the db config file.
        local = Path(db.local_dir())
        data_dir = local if local.is_absolute() else (db_path.parent / local)
    engine = Engine(data_dir, workers=args.workers)
    outcome = execute_pipeline(cfg, db, engine)
    print(format_table(outcome.result, limit=50))
    print(f"branches: {', '.join(sorted(outcome.branches_run))}")
    for stage, ms in outcome.timings_ms.items():
        print(f"  {stage}: {ms:.1f} ms")
    if args.output:
        Path(args.output).write_text(relation_to_csv(outcome.result), encoding="utf-8", newline="")
        print(f"wrote {args.output}")
    return 0


def cmd_analyze(args) -> int:
    engine = Engine(_data_dir(args))
    stats = engine.analyze(args.table, seed=args.seed)
    print(f"{args.table}: {stats.row_count} rows")
    for name, cs in stats.columns.items():
        print(
            f"  {name}: ndv~{cs.ndv_estimate:.1f} nulls={cs.null_count} "
            f"min={format_value(cs.min)} max={format_value(cs.max)}"
        )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .jobs import JobManager
    from .server import create_app

    engine = Engine(_data_dir(args), workers=args.workers)
    jobs = JobManager(engine, max_workers=args.workers or default_workers())
    frontend = Path(args.frontend) if args.frontend else Path.cwd() / "frontend" / "dist"
    app = create_app(
        engine,
        jobs,
        frontend_dir=frontend if frontend.is_dir() else None,
        page_size=args.page_size,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "load": cmd_load,
    "query": cmd_query,
    "run": cmd_run,
    "analyze": cmd_analyze,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except EngineError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
