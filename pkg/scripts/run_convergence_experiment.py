#!/usr/bin/env python3
"""Convergence-to-stationarity experiment for the busy-server kernel.

Builds a config for the exponential-interarrival, exponential-pulse pair
(the infinite-server queue), runs the `converge` command at several
transient times, and prints the per-time decisions.  All artifacts land in
the output directory.
"""

import argparse
import json
import sys
from pathlib import Path

from renewal_immigration.cli import main as cli_main


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out/converge")
    parser.add_argument("--seed", type=int, default=320)
    parser.add_argument("--n-replicates", type=int, default=10_000)
    parser.add_argument("--t", type=float, nargs="+", default=[1.0, 5.0, 30.0])
    parser.add_argument("--alpha", type=float, default=0.01)
    return parser.parse_args()


def main():
    args = parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = {
        "schema": 1,
        "law": {"family": "exponential", "rate": 1.0},
        "kernel": {"kind": "indicator", "eta": {"family": "exponential", "rate": 1.0}},
        "seed": args.seed,
        "t_list": list(args.t),
        "u_grid": [0.0, 1.0, 5.0],
        "n_replicates": args.n_replicates,
        "alpha": args.alpha,
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    code = cli_main(["converge", str(cfg_path), "--out-dir", str(out)])
    print((out / "summary.csv").read_text(), end="")
    return code


if __name__ == "__main__":
    sys.exit(main())
