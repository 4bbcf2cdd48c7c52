#!/usr/bin/env python3
"""Wallclock speedup of the trained ROMs over their full order models.

Loads (or builds) one linear-subspace run per problem, then times matched
pairs on fresh parameter points: a full FOM solve against the complete
online path (latent initial condition, adaptive integration, reconstruction).
Prints a per-problem table. Timings are same-process and single-threaded, so
the ratios are conservative relative to the batch setting where the
compression stage amortizes over many queries.
"""

import argparse
import time
from pathlib import Path

from lasdi import dynamics, pod
from lasdi.config import merge_dicts, parse_config
from lasdi.fom import measure_fom_walltime
from lasdi.pipeline import run_pipeline
from lasdi.presets import load_preset
from lasdi.problems import ParameterPoint
from lasdi.prediction import predict

# probe points sit inside each training domain but off the training grid
CASES = {
    "burgers1d-4pt": [(0.74, 0.96), (0.8, 1.01), (0.87, 1.06)],
    "heat-21pt": [(1.0, 1.9), (2.6, 2.0), (4.2, 2.1)],
}

# tiny test set: this script times predictions itself, the pipeline's own
# sweep only needs to exist so fit artifacts are cached on disk
TESTING = {"points": [[0.8, 1.0]]}
HEAT_TESTING = {"points": [[2.6, 2.0]]}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/speedup", type=Path)
    args = ap.parse_args(argv)

    print(f"{'problem':16s} {'fom s':>9s} {'rom s':>9s} {'speedup':>9s}")
    for preset, points in CASES.items():
        overlay = {"testing": HEAT_TESTING if preset.startswith("heat")
                   else TESTING}
        cfg = parse_config(merge_dicts(load_preset(preset), overlay))
        out = args.out / preset
        run_pipeline(cfg, out)

        problem = cfg.build_problem()
        basis = pod.load(out / "compressor.lpod")
        ens = dynamics.load(out / "model.ldim")
        predict(ens, basis, problem, points[0])  # hot caches before timing
        measure_fom_walltime(problem, ParameterPoint(points[0]))

        fom = rom = 0.0
        for p in points:
            fom += measure_fom_walltime(problem, ParameterPoint(p))
            t0 = time.perf_counter()
            predict(ens, basis, problem, p)
            rom += time.perf_counter() - t0
        fom /= len(points)
        rom /= len(points)
        print(f"{preset:16s} {fom:9.4f} {rom:9.4f} {fom / rom:8.0f}x")


if __name__ == "__main__":
    main()
