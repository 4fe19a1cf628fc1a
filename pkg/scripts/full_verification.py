#!/usr/bin/env python3
"""Run every verification surface and collect the reports under reports/.

Equivalent to:
    lops analyze <shipped ens spec> --json
    lops ens verify --json
    lops lab run --json
    lops cones --factor P1 --n 10000
plus a plain-text summary.  Deterministic for a fixed --seed.
"""

import argparse
import json
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lops import ens_spec_path
from lops.cli import main as cli_main


def run(argv, out_dir, name):
    t0 = time.time()
    path = os.path.join(out_dir, name)
    code = cli_main(argv + ["--out", path])
    print(f"{name:24s} exit={code} {time.time() - t0:6.1f}s")
    return code, path


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--out-dir", default=os.path.join(os.path.dirname(__file__), "..", "reports"))
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    seed = str(args.seed)

    codes = []
    codes.append(run(["analyze", ens_spec_path(), "--json", "--seed", seed],
                     args.out_dir, "analyze.json"))
    codes.append(run(["ens", "verify", "--json", "--seed", seed,
                      "--samples", str(args.samples)],
                     args.out_dir, "ens_verify.json"))
    codes.append(run(["lab", "run", "--json", "--seed", seed],
                     args.out_dir, "lab.json"))
    codes.append(run(["cones", "--factor", "P1", "--n", "10000", "--seed", seed],
                     args.out_dir, "cones_P1.csv"))

    summary = {}
    for code, path in codes:
        if path.endswith(".json"):
            summary[os.path.basename(path)] = json.load(open(path)).get("ok")
        else:
            summary[os.path.basename(path)] = code == 0
    print(json.dumps(summary, indent=2, sort_keys=True))
    sys.exit(0 if all(c == 0 for c, _ in codes) else 1)


if __name__ == "__main__":
    main()
