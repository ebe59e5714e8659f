"""Command-line interface.

Subcommands mirror the pipeline: `evaluate`, `refine`, `build-refiner-data`,
plus `serve` to run the HTTP service. Options may come from a TOML file
(`--config`); explicit flags always win. With `--server`, the job is posted
to a running service instead of executing in-process.

Endpoint auth (judge or NLI service) comes from the CITEVAL_API_TOKEN
environment variable, never from a flag.
"""

from __future__ import annotations

import argparse
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import httpx

from . import __version__, pipeline
from .config import RunConfig
from .errors import CiteEvalError

SERVER_PATHS = {
    "evaluate": "/v1/evaluate",
    "refine": "/v1/refine",
    "build-refiner-data": "/v1/build-refiner-data",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file with defaults; flags override it")
    p.add_argument("--server", help="base URL of a running citeval service")
    p.add_argument("--data", help="corpus file")
    p.add_argument("--format", choices=["webglm-jsonl", "alce-json"])
    p.add_argument("--pred", help="predictions JSONL (id, response)")
    p.add_argument("--out", help="output path")
    p.add_argument(
        "--backend", choices=["table", "lexical", "nli-http", "llm-judge"]
    )
    p.add_argument("--endpoint", help="backend base URL (nli-http / llm-judge)")
    p.add_argument("--table", help="entailment table JSON (table backend)")
    p.add_argument("--judge-model", dest="judge_model")
    p.add_argument("--cache", help="entailment cache JSONL path")
    p.add_argument("--metrics", help="comma list from: alce,ours,bleu,rouge")
    p.add_argument("--enum-cap", dest="enum_cap", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--correctness-aggregation",
        dest="correctness_aggregation",
        choices=["mean", "corpus"],
    )
    p.add_argument(
        "--premise-length-limit", dest="premise_length_limit", type=int
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citeval",
        description="Citation quality evaluation and refinement for RAG responses",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="score citations and correctness")
    _add_common(p_eval)

    p_refine = sub.add_parser("refine", help="rewrite citations in responses")
    _add_common(p_refine)
    p_refine.add_argument("--mode", choices=["oracle", "service", "posthoc"])
    p_refine.add_argument("--sim", choices=["bleu", "rouge"])
    p_refine.add_argument("--threshold", type=float)
    p_refine.add_argument("--changelog", help="where to write the change log")
    p_refine.add_argument("--refiner-endpoint", dest="refiner_endpoint")
    p_refine.add_argument(
        "--cited-only", dest="cited_only", action="store_true", default=None
    )
    p_refine.add_argument(
        "--no-prune", dest="prune", action="store_false", default=None
    )

    p_data = sub.add_parser(
        "build-refiner-data", help="emit refiner training records"
    )
    _add_common(p_data)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8400)

    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        with open(args.config, "rb") as fh:
            base.update(tomllib.load(fh))
    skip = {"command", "config", "server"}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        base[key] = value
    if isinstance(base.get("metrics"), str):
        base["metrics"] = [m.strip() for m in base["metrics"].split(",") if m.strip()]
    return RunConfig(**base)


def _print_summary(summary: dict) -> None:
    citation = summary.get("citation", {})
    for family in ("alce", "ours"):
        if family in citation:
            s = citation[family]
            print(
                f"citation ({family}): recall {s['recall']:.2f} "
                f"precision {s['precision']:.2f} f1 {s['f1']:.2f}"
            )
    correctness = summary.get("correctness", {})
    if correctness:
        parts = " ".join(f"{k} {v:.2f}" for k, v in sorted(correctness.items()))
        print(f"correctness: {parts}")
    counts = summary.get("counts")
    if counts:
        print(
            f"statements {counts['statements']} "
            f"(excluded {counts['excluded_statements']}), "
            f"citations {counts['citations']}, "
            f"dropped markers {counts['dropped_markers']}"
        )
    for key in (
        "records",
        "refined",
        "statements_changed",
        "skipped_over_cap",
        "skipped_no_answer",
        "out_of_range_dropped",
        "changelog",
    ):
        if key in summary:
            print(f"{key.replace('_', ' ')}: {summary[key]}")
    if "backend_calls" in summary:
        print(f"backend calls: {summary['backend_calls']}")


def _run_remote(server: str, command: str, cfg: RunConfig) -> int:
    url = server.rstrip("/") + SERVER_PATHS[command]
    try:
        resp = httpx.post(url, json=cfg.snapshot(), timeout=None)
    except httpx.HTTPError as exc:
        print(f"error: service at {server} unreachable: {exc}", file=sys.stderr)
        return 2
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except json.JSONDecodeError:
            detail = resp.text
        print(f"error: service returned {resp.status_code}: {detail}", file=sys.stderr)
        return 1
    body = resp.json()
    _print_summary(body.get("summary", {}))
    print(f"output -> {body.get('out', '')}")
    return 0


RUNNERS = {
    "evaluate": pipeline.run_evaluate,
    "refine": pipeline.run_refine,
    "build-refiner-data": pipeline.run_build_refiner_data,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        cfg = _resolve_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.server:
        return _run_remote(args.server, args.command, cfg)

    try:
        result = RUNNERS[args.command](cfg)
    except CiteEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_summary(result.summary)
    print(f"output -> {result.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
