#!/usr/bin/env python3
"""Seed-averaged deltas against no resampling on a large synthetic fraud set.

Defaults reproduce the directional check: 200k rows, fraud ratio 0.001,
10 seeds, random under- and oversampling.

    python3 scripts/run_evaluate.py --methods random_under,random_over,smote
"""
import argparse
import sys
import tempfile
from pathlib import Path

from imbresample.cli import main


def parse():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--rows", type=int, default=200_000)
    p.add_argument("--fraud-ratio", type=float, default=0.001)
    p.add_argument("--methods", default="random_under,random_over")
    p.add_argument("--ratio", type=float, default=0.1)
    p.add_argument("--seeds", default="0..9")
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--out", default="evaluate_out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p.parse_args()


def run() -> int:
    args = parse()
    with tempfile.TemporaryDirectory() as tmp:
        data = Path(tmp) / "synth.csv"
        code = main(["synth", "--rows", str(args.rows), "--fraud-ratio", str(args.fraud_ratio),
                     "--seed", str(args.data_seed), "--out", str(data)])
        if code:
            return code
        argv = ["evaluate", "--data", str(data), "--methods", args.methods, "--ratio", str(args.ratio),
                "--seeds", args.seeds, "--out", args.out]
        return main(argv + (["-v"] if args.verbose else []))


if __name__ == "__main__":
    sys.exit(run())
