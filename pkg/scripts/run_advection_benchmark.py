#!/usr/bin/env python3
"""Run the three 2D advection experiments (fixed rank, thresholds 1e-1, 1e-2)
and print a comparison table."""

import argparse
import json
from pathlib import Path

from fttpde.cli import preset_path
from fttpde.runner import parse_config, run_experiment

PRESETS = ("advection2d_fixed", "advection2d_inc1e-1", "advection2d_inc1e-2")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default="results/advection2d")
    args = ap.parse_args()
    root = Path(args.output_dir)
    rows = []
    for name in PRESETS:
        cfg = parse_config(preset_path(name))
        summary = run_experiment(cfg, output_dir=root / name)
        rows.append((name, summary))
        print(json.dumps(summary, sort_keys=True))
    print()
    print(f"{'run':26s} {'final L2 error':>14s} {'final ranks':>14s} {'inc':>4s} {'dec':>4s}")
    for name, s in rows:
        err = "n/a" if s["final_error"] is None else f"{s['final_error']:.3e}"
        print(
            f"{name:26s} {err:>14s} {str(s['final_ranks']):>14s} "
            f"{s['inc_events']:>4d} {s['dec_events']:>4d}"
        )


if __name__ == "__main__":
    main()
