"""Command-line interface: run experiments, list presets, inspect snapshots."""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from importlib import resources
from pathlib import Path

from .runner import ConfigError, parse_config, run_experiment
from . import snapshots


def preset_names() -> list[str]:
    root = resources.files("fttpde") / "presets"
    return sorted(p.name[: -len(".cfg")] for p in root.iterdir() if p.name.endswith(".cfg"))


def preset_path(name: str) -> Path:
    path = resources.files("fttpde") / "presets" / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; see 'fttpde presets list'")
    return Path(str(path))


def _run_one(config_path: str, output_dir: str | None) -> dict:
    config = parse_config(config_path)
    return run_experiment(config, output_dir=output_dir)


def _cmd_run(args) -> int:
    jobs = []
    multi = len(args.config) > 1
    for cfg_path in args.config:
        out = args.output_dir
        if out is not None and multi:
            out = str(Path(out) / Path(cfg_path).stem)
        jobs.append((cfg_path, out))
    status = 0
    if args.jobs > 1 and multi:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {pool.submit(_run_one, c, o): c for c, o in jobs}
            for fut in concurrent.futures.as_completed(futures):
                summary = fut.result()
                print(json.dumps(summary, sort_keys=True))
                if summary["status"] != "ok":
                    status = 2
    else:
        for cfg_path, out in jobs:
            summary = _run_one(cfg_path, out)
            print(json.dumps(summary, sort_keys=True))
            if summary["status"] != "ok":
                status = 2
    return status


def _cmd_presets(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(name)
    return 0


def _cmd_snapshot(args) -> int:
    if args.action == "info":
        print(json.dumps(snapshots.describe(args.file), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fttpde",
        description="Rank-adaptive tensor-train integration of periodic PDEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one or more run configs")
    p_run.add_argument("config", nargs="+", help="flat key=value config file(s)")
    p_run.add_argument("--output-dir", default=None, help="directory for run outputs")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel runs across configs")
    p_run.set_defaults(func=_cmd_run)

    p_presets = sub.add_parser("presets", help="preset configurations")
    p_presets.add_argument("action", choices=["list"])
    p_presets.set_defaults(func=_cmd_presets)

    p_snap = sub.add_parser("snapshot", help="inspect snapshot files")
    p_snap.add_argument("action", choices=["info"])
    p_snap.add_argument("file")
    p_snap.set_defaults(func=_cmd_snapshot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
