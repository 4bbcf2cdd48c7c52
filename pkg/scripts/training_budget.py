#!/usr/bin/env python3
"""Autoencoder ROM accuracy versus the number of training trajectories.

Runs the nonlinear-manifold pipeline on 1D Burgers with 4, 9 and 25 training
points (the three shipped presets) while holding the autoencoder recipe and
seed fixed, then reports the worst relative error over the 21 x 21 test
grid. More training data should push the max error down; the run prints the
three numbers side by side so the trend is obvious.

Budget ~25 min from scratch (three autoencoder trainings plus 441 reference
solves each); --quick trims epochs and the test grid for a smoke pass.
"""

import argparse
import csv
from pathlib import Path

from lasdi.config import merge_dicts, parse_config
from lasdi.pipeline import run_pipeline
from lasdi.presets import load_preset

PRESETS = ("burgers1d-4pt", "burgers1d-9pt", "burgers1d-25pt")

# one recipe for every run: the comparison varies nothing but the data
AE = {"compression": {"kind": "ae", "latent_dim": 4, "hidden_width": 64,
                      "activation": "swish", "epochs": 600,
                      "learning_rate": 1e-3, "batch_size": 512, "seed": 0}}

QUICK = {"compression": {"epochs": 120},
         "testing": {"grid": [{"start": 0.7, "stop": 0.9, "step": 0.05},
                              {"start": 0.9, "stop": 1.1, "step": 0.1}]}}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/training-budget", type=Path)
    ap.add_argument("--quick", action="store_true",
                    help="fewer epochs and a coarse test grid")
    args = ap.parse_args(argv)

    results = []
    for preset in PRESETS:
        overlay = merge_dicts(AE, QUICK) if args.quick else AE
        cfg = parse_config(merge_dicts(load_preset(preset), overlay))
        out = args.out / preset
        run_pipeline(cfg, out)
        with open(out / "summary.csv") as f:
            s = {k: float(v) for k, v in next(csv.DictReader(f)).items()}
        results.append((len(cfg.training), s["max_error"], int(s["n_failed"])))
        print(f"{preset:16s}  n_train={results[-1][0]:3d}  "
              f"max error {s['max_error']:.4%}  failed {results[-1][2]}")

    path = args.out / "budget.csv"
    with open(path, "w") as f:
        f.write("n_train,max_error,n_failed\n")
        for r in results:
            f.write(f"{r[0]},{r[1]:.17g},{r[2]}\n")
    print(f"wrote {path}")

    errs = [r[1] for r in results]
    trend = "monotone decrease" if errs[0] > errs[1] > errs[2] else \
        "NOT monotone on this run"
    print("max error over 4 -> 9 -> 25 training points: " +
          " -> ".join(f"{e:.3%}" for e in errs) + f"  ({trend})")


if __name__ == "__main__":
    main()
