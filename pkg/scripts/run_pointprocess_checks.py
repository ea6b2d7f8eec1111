#!/usr/bin/env python3
"""Validate the stationary window construction for a chosen interarrival law.

Runs the point-process checks (intensity, overshoot, shift invariance,
Laplace functionals) through the CLI and prints the JSON report path and
exit status.
"""

import argparse
import json
import sys
from pathlib import Path

from renewal_immigration.cli import main as cli_main

LAWS = {
    "exponential": {"family": "exponential", "rate": 1.0},
    "uniform": {"family": "uniform", "lo": 0.0, "hi": 1.0},
    "gamma": {"family": "gamma", "shape": 2.0, "scale": 0.5},
    "point_mass": {"family": "point_mass", "value": 1.0},
}


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("law", choices=sorted(LAWS))
    parser.add_argument("--out-dir", default=None)
    parser.add_argument("--seed", type=int, default=17)
    parser.add_argument("--n", type=int, default=10_000)
    return parser.parse_args()


def main():
    args = parse_args()
    out = Path(args.out_dir or f"out/pointprocess-{args.law}")
    out.mkdir(parents=True, exist_ok=True)
    config = {
        "schema": 1,
        "law": LAWS[args.law],
        "kernel": {"kind": "deterministic_table", "breakpoints": [0.0], "values": [0.0]},
        "seed": args.seed,
        "pointprocess": {"n_realizations": args.n, "n_windows": args.n},
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    code = cli_main(["pointprocess", str(cfg_path), "--out-dir", str(out)])
    print(f"report: {out / 'pointprocess.json'} (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
