"""Command-line entry points: run, serve, export.

Exit codes: 0 success, 2 partial corpus failure (some files skipped, at
least one processed), 1 fatal error (bad config, nothing parseable, bind
failure).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import PpkgError
from .graph import degree_summary, export_graph_json, parse_graphml
from .pipeline import load_config, run_pipeline
from .service import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppkg",
        description="Cluster privacy-policy knowledge graphs and serve the explorer API.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the pipeline over a file or corpus directory")
    run_p.add_argument("--config", required=True, help="JSON config path")
    run_p.add_argument("--input", help="override the config input path")
    run_p.add_argument("--out", help="override the config output directory")
    run_p.add_argument("--seed", type=int, help="override the config seed")

    serve_p = sub.add_parser("serve", help="serve the HTTP API for the explorer UI")
    serve_p.add_argument("--config", required=True, help="JSON config path")
    serve_p.add_argument("--bind", required=True, help="host:port to listen on")

    export_p = sub.add_parser("export", help="convert one GraphML file to explorer JSON")
    export_p.add_argument("--input", required=True, help="GraphML path")
    export_p.add_argument("--out", required=True, help="output JSON path")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config, input_override=args.input,
                         out_override=args.out, seed_override=args.seed)
    artifacts = run_pipeline(config)
    for policy in artifacts.policies:
        print(f"processed {policy}")
    for path, message in artifacts.errors:
        print(f"skipped {path}: {message}", file=sys.stderr)
    print(f"manifest: {artifacts.manifest_path}")
    return 2 if artifacts.errors else 0


def _cmd_serve(args: argparse.Namespace) -> int:
    serve(load_config(args.config), args.bind)
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    graph = parse_graphml(Path(args.input).read_bytes())
    Path(args.out).write_bytes(export_graph_json(graph, degree_summary(graph)))
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "serve": _cmd_serve, "export": _cmd_export}
    try:
        return handlers[args.command](args)
    except (PpkgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
