"""Command-line interface for the stage pipeline.

Subcommands mirror the stages; ``run-all`` executes them in order. Global
flags select the store directory, config file, seed, and force mode; a few
per-stage flags override the matching config keys.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ForgeMineError
from .pipeline import STAGES, load_config, run_all, run_stage
from .store import CorpusStore


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forgemine",
        description="Mine self-hosted git forges and compare repository populations.",
    )
    parser.add_argument("--store", required=True, help="corpus store directory")
    parser.add_argument("--config", help="JSON config file (see README for keys)")
    parser.add_argument("--seed", type=int, help="override the configured random seed")
    parser.add_argument(
        "--force", action="store_true", help="rerun completed stages / accept config drift"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        if stage == "crawl":
            p.add_argument("--rate", type=float, help="min seconds between requests per host")
            p.add_argument("--concurrency", type=int, help="concurrent hosts")
            p.add_argument("--hosts", help="host list file (overrides scan.hosts_file)")
        if stage == "clone":
            p.add_argument("--dest", help="clone destination root")
            p.add_argument("--retries", type=int, help="retries for failed clones")
            p.add_argument("--timeout-mins", type=float, help="per-repository clone timeout")
    sub.add_parser("run-all", help="run every stage in order")
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "rate", None) is not None:
        overrides.setdefault("rate", {})["min_interval_s"] = args.rate
    if getattr(args, "concurrency", None) is not None:
        overrides.setdefault("rate", {})["concurrency"] = args.concurrency
    if getattr(args, "hosts", None) is not None:
        overrides.setdefault("scan", {})["hosts_file"] = args.hosts
    if getattr(args, "retries", None) is not None:
        overrides.setdefault("clone", {})["retries"] = args.retries
    if getattr(args, "timeout_mins", None) is not None:
        overrides.setdefault("clone", {})["timeout_mins"] = args.timeout_mins
    if getattr(args, "dest", None) is not None:
        overrides.setdefault("clone", {})["dest"] = args.dest
    return overrides


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(args.config, _overrides_from_args(args))
    store = CorpusStore(args.store)
    try:
        if args.command == "run-all":
            summaries = run_all(config, store, force=args.force)
        else:
            summaries = [run_stage(args.command, config, store, force=args.force)]
    except ForgeMineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for summary in summaries:
        print(json.dumps(summary, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
