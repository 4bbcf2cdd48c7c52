"""Command line driver.

    lasdi pipeline --preset burgers1d-4pt --out runs/b4
    lasdi gen-fom  --config my_run.json
    lasdi predict  --preset burgers1d-4pt --out runs/b4 --mu 0.8,1.01
    lasdi dump     runs/b4/model.ldim

A run is configured by --preset NAME, --config PATH, or both; with both, the
config file overlays the preset key by key. The output directory resolves as
--out, then the config's output_dir, then $LASDI_OUT, then runs/<name>.
Exit codes: 0 success, 1 config error, 2 solver/training failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__, dynamics, pipeline
from .config import merge_dicts, parse_config, _read_json
from .errors import ConfigError, LasdiError
from .presets import load_preset, preset_names


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the exit-code contract
    # reserves 2 for solver failures, so route usage errors through
    # ConfigError (exit 1) instead
    def error(self, message):
        raise ConfigError(message)


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help="JSON run config")
    p.add_argument("--preset", metavar="NAME",
                   help=f"named preset ({', '.join(preset_names())})")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="parallel FOM solves inside a stage (default 1)")
    p.add_argument("--deterministic", action="store_true",
                   help="force single-threaded sweeps")
    p.add_argument("--dry-run", action="store_true",
                   help="print the stage plan and touch nothing")


def build_parser() -> _Parser:
    top = _Parser(prog="lasdi", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--version", action="version",
                     version=f"lasdi {__version__}")
    sub = top.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("gen-fom", "solve the training-set FOM trajectories"),
        ("compress", "train the compressor and emit latent trajectories"),
        ("fit", "identify the latent dynamics"),
        ("evaluate", "sweep the test set into heatmap and summary CSVs"),
        ("pipeline", "run every stage in order"),
    ):
        _add_common(sub.add_parser(name, help=blurb))
    pred = sub.add_parser("predict", help="predict at one parameter point")
    _add_common(pred)
    pred.add_argument("--mu", required=True, metavar="V1[,V2…]",
                      help="parameter point, comma separated")
    dump = sub.add_parser("dump", help="print an identified ODE system")
    dump.add_argument("path", nargs="?", metavar="MODEL.ldim",
                      help="model file (default: <out>/model.ldim)")
    _add_common(dump)
    return top


def resolve_config(args):
    if not args.preset and not args.config:
        raise ConfigError("need --preset and/or --config to describe the run")
    merged = load_preset(args.preset) if args.preset else {}
    if args.config:
        merged = merge_dicts(merged, _read_json(args.config))
    return parse_config(merged)


def resolve_out(args, cfg) -> Path:
    out = args.out or cfg.output_dir or os.environ.get("LASDI_OUT")
    return Path(out) if out else Path("runs") / cfg.name


def _parse_mu(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--mu must be comma-separated numbers, got {text!r}")\
            from None


def _print_plan(cfg, out, stages):
    print(f"run {cfg.name!r} -> {out}")
    for stage, cached in pipeline.plan(cfg, out):
        if stage not in stages:
            continue
        print(f"  {stage:10s} {'cached' if cached else 'would run'}")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = None
    try:
        args = build_parser().parse_args(argv)
        jobs = 1 if getattr(args, "deterministic", False) \
            else max(1, getattr(args, "jobs", 1))

        if args.command == "dump":
            if args.path:
                path = Path(args.path)
            else:
                cfg = resolve_config(args)
                path = resolve_out(args, cfg) / "model.ldim"
            print(pipeline.render_ode_dump(dynamics.load(path)), end="")
            return 0

        cfg = resolve_config(args)
        out = resolve_out(args, cfg)

        if args.command == "pipeline":
            stages = pipeline.STAGE_ORDER
        elif args.command == "predict":
            stages = ()
        else:
            stages = (args.command,)
        if args.dry_run:
            _print_plan(cfg, out, stages or ("gen-fom", "compress", "fit"))
            return 0

        if args.command == "gen-fom":
            pipeline.stage_gen_fom(cfg, out, jobs=jobs)
        elif args.command == "compress":
            pipeline.stage_compress(cfg, out)
        elif args.command == "fit":
            pipeline.stage_fit(cfg, out)
        elif args.command == "evaluate":
            pipeline.stage_evaluate(cfg, out, jobs=jobs)
        elif args.command == "pipeline":
            pipeline.run_pipeline(cfg, out, jobs=jobs)
        elif args.command == "predict":
            _, err = pipeline.stage_predict(cfg, out, _parse_mu(args.mu))
            if err is not None:
                print(f"max relative error at {args.mu}: {err:.6e}")
        return 0
    except LasdiError as exc:
        print(f"lasdi: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"lasdi: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
