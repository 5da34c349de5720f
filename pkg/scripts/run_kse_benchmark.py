#!/usr/bin/env python3
"""Run the 2D Kuramoto-Sivashinsky experiments: constant rank 2 plus the
adaptive thresholds 10, 1e-1 and 1e-2."""

import argparse
import json
from pathlib import Path

from fttpde.cli import preset_path
from fttpde.runner import parse_config, run_experiment

PRESETS = ("kse2d_rank2", "kse2d_inc10", "kse2d_inc1e-1", "kse2d_inc1e-2")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default="results/kse2d")
    ap.add_argument("--only", nargs="*", choices=PRESETS, help="subset of presets to run")
    args = ap.parse_args()
    root = Path(args.output_dir)
    for name in args.only or PRESETS:
        cfg = parse_config(preset_path(name))
        summary = run_experiment(cfg, output_dir=root / name)
        print(json.dumps(summary, sort_keys=True))


if __name__ == "__main__":
    main()
