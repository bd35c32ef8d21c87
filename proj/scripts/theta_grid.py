#!/usr/bin/env python3
"""Grid search over the CF temperature parameters (theta+, theta-) and the
pulse threshold tau, using `memgrad train`. Selection uses validation accuracy
only; the final test accuracy is printed for reference.

example:
  scripts/theta_grid.py --memgrad build/tools/memgrad --algo cf --seeds 3 \
      --theta 0.05,0.1,0.2,0.5 --tau 0.001,0.003,0.01
"""

import argparse
import csv
import itertools
import json
import pathlib
import statistics
import subprocess
import sys


def floats(text):
    return [float(v) for v in text.split(",") if v]


def final_val_accuracy(run_dir):
    with open(run_dir / "curve.csv") as f:
        rows = [r for r in csv.DictReader(f) if r["split"] == "val"]
    return float(rows[-1]["accuracy"])


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--memgrad", default="build/tools/memgrad")
    ap.add_argument("--algo", default="cf", choices=["cf", "float-cf"])
    ap.add_argument("--theta", type=floats, default=floats("0.05,0.1,0.2,0.5,1.0"))
    ap.add_argument("--tau", type=floats, default=floats("0.003"))
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--set", action="append", default=[], help="extra config override")
    ap.add_argument("--out", default="runs/theta-grid")
    ap.add_argument("--csv", default=None, help="write the grid table here")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    table = []
    for tp, tm, tau in itertools.product(args.theta, args.theta, args.tau):
        cf = {"variant": "temperature", "theta_plus": tp, "theta_minus": tm, "eta": 1}
        run_dir = out / f"tp{tp}_tm{tm}_tau{tau}"
        cmd = [args.memgrad, "train", "--algo", args.algo, "--out", str(run_dir), "--repeat", str(args.seeds),
               "--set", "rules.cf=" + json.dumps([cf, cf]), "--set", f"rules.tau=[{tau},{tau}]"]
        for s in args.set:
            cmd += ["--set", s]
        subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)
        summary = json.loads((run_dir / "summary.json").read_text())
        val = [final_val_accuracy(pathlib.Path(d))
              for d in summary["run_dirs"]]
        row = {
            "theta_plus": tp, "theta_minus": tm, "tau": tau,
            "val_mean": statistics.mean(val), "test_mean": summary["mean"], "test_sd": summary["sd"],
            "pulses_per_device": statistics.mean(summary.get("mean_pulses_per_device") or [0.0]),
        }
        table.append(row)
        print(f"theta+={tp:<5} theta-={tm:<5} tau={tau:<6} val={row['val_mean']:.4f} "
              f"test={row['test_mean']:.4f}+-{row['test_sd']:.4f} pulses/device={row['pulses_per_device']:.0f}",
              flush=True)

    best = max(table, key=lambda r: r["val_mean"])
    print(f"best by validation: theta+={best['theta_plus']} theta-={best['theta_minus']} tau={best['tau']}")
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(table[0]))
            w.writeheader()
            w.writerows(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
