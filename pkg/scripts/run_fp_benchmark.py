#!/usr/bin/env python3
"""Run the 4D Fokker-Planck experiments (fixed rank 1, thresholds 1e-2 and
1e-3).  The default horizon is the scaled t = 0.2 study; pass --long for the
full t = 1, dt = 1e-4 run."""

import argparse
import json
from pathlib import Path

from fttpde.cli import preset_path
from fttpde.runner import parse_config, run_experiment

PRESETS = ("fp4d_fixed", "fp4d_inc1e-2", "fp4d_inc1e-3")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default="results/fp4d")
    ap.add_argument("--long", action="store_true", help="also run the t=1, dt=1e-4 study")
    args = ap.parse_args()
    root = Path(args.output_dir)
    names = list(PRESETS) + (["fp4d_inc1e-3_long"] if args.long else [])
    for name in names:
        cfg = parse_config(preset_path(name))
        summary = run_experiment(cfg, output_dir=root / name)
        print(json.dumps(summary, sort_keys=True))


if __name__ == "__main__":
    main()
