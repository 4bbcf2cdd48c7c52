"""Stage orchestration over a run directory.

Artifact layout under the output directory:

    fom/train_000.lsnap …   per-training-point trajectories
    fom/test_0000.lsnap …   test references (only with solve_test_references)
    fom/solve_times.json    per-file FOM solve wallclocks
    snapshots.lsnap         assembled training snapshot matrix
    compressor.lpod/.lae    trained compressor
    latent.lsnap            latent trajectories, same parameter layout
    sv_decay.csv            POD singular values (index,sigma,retained_mass)
    training_history.csv    autoencoder loss per epoch (epoch,mse)
    model.ldim              identified-dynamics ensemble
    ode.txt                 identified system, human readable
    predict/…               per-point predictions: trajectory container,
                            final-time profile CSV, latent trajectory CSV
    heatmap.csv summary.csv test-sweep outputs
    manifest.json           stage hashes for caching and integrity

Every stage derives a digest from its config slice chained with its
upstream digest, so editing any upstream setting invalidates the whole
suffix of the pipeline. A stage whose digest and artifact hashes both match
the manifest is skipped.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import autoencoder, dynamics, pod, snapshots
from .autoencoder import build_mask, train_autoencoder
from .config import RunConfig, to_dict
from .dynamics import coefficients_for, fit_ensemble, format_ode
from .errors import DomainError, LasdiError, SolverError
from .fom import solve_fom
from .manifest import (RunManifest, StageTimer, config_digest, file_sha256,
                       load_manifest)
from .prediction import (SpeedupReport, evaluate_testset, max_relative_error,
                         predict, write_heatmap_csv, write_summary_csv)
from .problems import ParameterPoint
from .snapshots import SnapshotMatrix, assemble, slice_block

log = logging.getLogger("lasdi.pipeline")

STAGE_ORDER = ("gen-fom", "compress", "fit", "evaluate")


def stage_digests(cfg: RunConfig) -> dict:
    """Chained per-stage digests of the config slices each stage consumes."""
    d = to_dict(cfg)
    gen = config_digest({"problem": d["problem"], "training": d["training"],
                         "testing": d["testing"] if cfg.solve_test_references
                         else None})
    comp = config_digest({"upstream": gen, "compression": d["compression"]})
    fit = config_digest({"upstream": comp, "library": d["library"],
                         "dynamics": d["dynamics"]})
    ev = config_digest({"upstream": fit, "testing": d["testing"],
                        "solver": d["solver"]})
    return {"gen-fom": gen, "compress": comp, "fit": fit, "evaluate": ev}


def plan(cfg: RunConfig, out) -> list:
    """(stage, cached) pairs in execution order; touches nothing."""
    man = load_manifest(out)
    digs = stage_digests(cfg)
    return [(s, man.up_to_date(s, digs[s])) for s in STAGE_ORDER]


def _param_points(cfg: RunConfig):
    return [ParameterPoint(p) for p in cfg.training]


def _solve_one(problem, values, path):
    """Worker: solve one FOM point and persist it. Returns (seconds, error)."""
    t0 = time.perf_counter()
    try:
        traj = solve_fom(problem, ParameterPoint(values))
    except LasdiError as exc:
        return time.perf_counter() - t0, f"{type(exc).__name__}: {exc}"
    m = SnapshotMatrix(data=traj.states, params=[traj.param],
                       n_time=problem.timegrid.n_steps)
    snapshots.save(m, path)
    return time.perf_counter() - t0, None


def _run_solves(problem, tasks, jobs):
    """tasks: list of (label, values, path). Returns (times, failures)."""
    times, failures = {}, []
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {pool.submit(_solve_one, problem, v, p): (label, v)
                    for label, v, p in tasks}
            for fut in futs:
                label, v = futs[fut]
                secs, err = fut.result()
                times[label] = secs
                if err:
                    failures.append((tuple(v), err))
    else:
        for label, v, p in tasks:
            secs, err = _solve_one(problem, v, p)
            times[label] = secs
            if err:
                failures.append((tuple(v), err))
    for values, err in failures:
        log.error("FOM solve failed at %s: %s", values, err)
    return times, failures


def stage_gen_fom(cfg: RunConfig, out, man: RunManifest | None = None,
                  jobs: int = 1) -> None:
    out = Path(out)
    man = man or load_manifest(out)
    digest = stage_digests(cfg)["gen-fom"]
    if man.up_to_date("gen-fom", digest):
        log.info("gen-fom: up to date, skipping")
        return
    problem = cfg.build_problem()
    fom_dir = out / "fom"
    fom_dir.mkdir(parents=True, exist_ok=True)

    entries = [(f"train_{k:03d}", p, fom_dir / f"train_{k:03d}.lsnap")
               for k, p in enumerate(cfg.training)]
    if cfg.solve_test_references:
        entries += [(f"test_{k:04d}", p, fom_dir / f"test_{k:04d}.lsnap")
                    for k, p in enumerate(cfg.testing)]

    times_path = fom_dir / "solve_times.json"
    old_times = json.loads(times_path.read_text()) if times_path.exists() else {}
    prev = man.stages.get("gen-fom")
    reusable = prev.artifacts if prev and prev.config_digest == digest else {}

    with StageTimer() as timer:
        tasks, times = [], {}
        for label, values, path in entries:
            rel = str(path.relative_to(out))
            if (rel in reusable and path.exists()
                    and file_sha256(path) == reusable[rel]):
                times[label] = old_times.get(label)
                continue
            tasks.append((label, values, path))
        log.info("gen-fom: %d of %d points to solve", len(tasks), len(entries))
        fresh_times, failures = _run_solves(problem, tasks, jobs)
        times.update(fresh_times)
        n_train_failed = sum(1 for v, _ in failures if tuple(v) in
                             {tuple(p) for p in cfg.training})
        if n_train_failed:
            raise SolverError(
                f"{n_train_failed} of {len(cfg.training)} training solves "
                f"failed; see log for per-point diagnostics")
        trajs = [snapshots.load(path) for _, _, path in entries
                 if path.name.startswith("train_")]
        big = assemble([_as_traj(m) for m in trajs])
        snapshots.save(big, out / "snapshots.lsnap")
        times_path.write_text(json.dumps(times, indent=1, sort_keys=True))

    artifacts = [path for _, _, path in entries] + [out / "snapshots.lsnap",
                                                    times_path]
    man.record("gen-fom", digest, artifacts, timer.seconds)
    log.info("gen-fom: %d trajectories, %.1fs", len(entries), timer.seconds)


def _as_traj(m: SnapshotMatrix):
    from .problems import StateTrajectory

    return StateTrajectory(states=m.data, param=m.params[0])


def stage_compress(cfg: RunConfig, out, man: RunManifest | None = None) -> None:
    out = Path(out)
    man = man or load_manifest(out)
    digest = stage_digests(cfg)["compress"]
    man.verify_input("gen-fom", out / "snapshots.lsnap")
    if man.up_to_date("compress", digest):
        log.info("compress: up to date, skipping")
        return
    S = snapshots.load(out / "snapshots.lsnap")
    problem = cfg.build_problem()
    n_s = cfg.compression.latent_dim
    artifacts = []

    with StageTimer() as timer:
        if cfg.compression.kind == "pod":
            basis = pod.compute_pod(S, n_s)
            model_path = out / "compressor.lpod"
            pod.save(basis, model_path)
            sv_path = out / "sv_decay.csv"
            _write_sv_csv(basis, sv_path)
            artifacts += [model_path, sv_path]
            proj = basis.phi @ (basis.phi.T @ S.data)
            rel = np.linalg.norm(S.data - proj) / np.linalg.norm(S.data)
            log.info("compress: pod n_s=%d, retained mass %.6f, projection "
                     "error %.3e", n_s, pod.singular_value_mass(basis, n_s), rel)
            encode = lambda block: pod.pod_encode(basis, block)
        else:
            h = cfg.compression.hidden_width or problem.grid.n_nodes
            mask = build_mask(problem.grid, h, problem.n_components)
            ae = train_autoencoder(S, n_s, cfg.compression.ae_config(), mask)
            model_path = out / "compressor.lae"
            autoencoder.save(ae, model_path)
            hist_path = out / "training_history.csv"
            with open(hist_path, "w") as f:
                f.write("epoch,mse\n")
                f.writelines(f"{e},{v:.17g}\n" for e, v in enumerate(ae.history))
            artifacts += [model_path, hist_path]
            log.info("compress: autoencoder n_s=%d h=%d, mse %.3e -> %.3e "
                     "(best epoch %d)", n_s, h, ae.record.initial_mse,
                     ae.record.final_mse, ae.record.best_epoch)
            encode = lambda block: autoencoder.ae_encode(ae, block)

        blocks = [encode(slice_block(S, k)) for k in range(1, S.n_params + 1)]
        latent = SnapshotMatrix(data=np.concatenate(blocks, axis=1),
                                params=list(S.params), n_time=S.n_time)
        latent_path = out / "latent.lsnap"
        snapshots.save(latent, latent_path)
        artifacts.append(latent_path)

    man.record("compress", digest, artifacts, timer.seconds)


def _write_sv_csv(basis, path) -> None:
    total = basis.sigma.sum()
    with open(path, "w") as f:
        f.write("index,sigma,retained_mass\n")
        running = 0.0
        for i, s in enumerate(basis.sigma, start=1):
            running += s
            mass = running / total if total > 0 else 1.0
            f.write(f"{i},{s:.17g},{mass:.17g}\n")


def stage_fit(cfg: RunConfig, out, man: RunManifest | None = None) -> None:
    out = Path(out)
    man = man or load_manifest(out)
    digest = stage_digests(cfg)["fit"]
    man.verify_input("compress", out / "latent.lsnap")
    if man.up_to_date("fit", digest):
        log.info("fit: up to date, skipping")
        return
    latent = snapshots.load(out / "latent.lsnap")
    problem = cfg.build_problem()
    blocks = [slice_block(latent, k) for k in range(1, latent.n_params + 1)]
    P = np.array([tuple(p.values) for p in latent.params])

    with StageTimer() as timer:
        ens = fit_ensemble(blocks, P, cfg.library, problem.timegrid.dt,
                           strategy=cfg.dynamics.strategy,
                           n_di=cfg.dynamics.n_di,
                           method=cfg.dynamics.method,
                           use_rescale=cfg.dynamics.rescale,
                           refine=cfg.dynamics.refine)
        model_path = out / "model.ldim"
        dynamics.save(ens, model_path)
        ode_path = out / "ode.txt"
        ode_path.write_text(render_ode_dump(ens))

    man.record("fit", digest, [model_path, ode_path], timer.seconds)
    log.info("fit: %s DI over %d training points", cfg.dynamics.strategy,
             len(blocks))


def render_ode_dump(ens) -> str:
    """Identified system(s) as text, one section per fitted region."""
    if ens.strategy == "global":
        return f"# global DI, scale={ens.scale:g}\n{format_ode(ens.global_fit)}\n"
    parts = []
    for p in ens.train_params:
        fit = coefficients_for(ens, tuple(p))
        head = ", ".join(f"{v:g}" for v in p)
        parts.append(f"# {ens.strategy} DI at ({head}), scale={ens.scale:g}\n"
                     f"{format_ode(fit)}\n")
    return "\n".join(parts)


def _load_compressor(cfg: RunConfig, out: Path, man: RunManifest):
    suffix = ".lpod" if cfg.compression.kind == "pod" else ".lae"
    path = out / f"compressor{suffix}"
    man.verify_input("compress", path)
    return pod.load(path) if suffix == ".lpod" else autoencoder.load(path)


def _load_references(cfg: RunConfig, out: Path):
    """Pre-solved test references plus their recorded solve times, if any."""
    refs, times = {}, []
    times_path = out / "fom" / "solve_times.json"
    stored = json.loads(times_path.read_text()) if times_path.exists() else {}
    for k, p in enumerate(cfg.testing):
        path = out / "fom" / f"test_{k:04d}.lsnap"
        if path.exists():
            refs[tuple(float(v) for v in p)] = snapshots.load(path).data
            t = stored.get(f"test_{k:04d}")
            if t is not None:
                times.append(t)
    return refs, times


def stage_evaluate(cfg: RunConfig, out, man: RunManifest | None = None,
                   jobs: int = 1) -> None:
    out = Path(out)
    man = man or load_manifest(out)
    digest = stage_digests(cfg)["evaluate"]
    suffix = ".lpod" if cfg.compression.kind == "pod" else ".lae"
    man.verify_input("compress", out / f"compressor{suffix}")
    man.verify_input("fit", out / "model.ldim")
    if man.up_to_date("evaluate", digest):
        log.info("evaluate: up to date, skipping")
        return
    problem = cfg.build_problem()
    compressor = _load_compressor(cfg, out, man)
    ens = dynamics.load(out / "model.ldim")
    references, ref_times = _load_references(cfg, out)

    with StageTimer() as timer:
        if jobs > 1 and len(references) < len(cfg.testing):
            # parallel FOM pre-solve; predictions stay sequential so their
            # timings remain comparable
            tmp = out / "fom" / "ref_tmp"
            tmp.mkdir(parents=True, exist_ok=True)
            tasks = [(f"r{k}", p, tmp / f"r{k}.lsnap")
                     for k, p in enumerate(cfg.testing)
                     if tuple(float(v) for v in p) not in references]
            times, _ = _run_solves(problem, tasks, jobs)
            for label, p, path in tasks:
                if path.exists():
                    references[tuple(float(v) for v in p)] = snapshots.load(path).data
                    ref_times.append(times[label])
        report, speed = evaluate_testset(ens, compressor, problem,
                                         np.array(cfg.testing, dtype=np.float64)
                                         if cfg.testing else [],
                                         solver_config=cfg.solver,
                                         references=references)
        if not np.isfinite(speed.fom_seconds) and ref_times:
            speed = SpeedupReport(fom_seconds=float(np.mean(ref_times)),
                                  lasdi_seconds=speed.lasdi_seconds)
        heat_path = out / "heatmap.csv"
        sum_path = out / "summary.csv"
        write_heatmap_csv(report, heat_path)
        write_summary_csv(report, speed, sum_path)

    man.record("evaluate", digest, [heat_path, sum_path], timer.seconds)
    log.info("evaluate: %d points, %d failed, error range [%.3e, %.3e], "
             "speedup %.1fx", len(cfg.testing), report.n_failed,
             report.best if cfg.testing else float("nan"),
             report.worst if cfg.testing else float("nan"), speed.ratio)


def _mu_tag(problem, mu) -> str:
    return "_".join(f"{n}{v:g}" for n, v in zip(problem.param_names, mu))


def stage_predict(cfg: RunConfig, out, mu, man: RunManifest | None = None):
    """Predict at one parameter point; returns (trajectory, error or None).

    Out-of-domain points are allowed: a warning is logged and the model
    extrapolates. The error against a fresh FOM reference is computed only
    for in-domain points.
    """
    out = Path(out)
    man = man or load_manifest(out)
    problem = cfg.build_problem()
    compressor = _load_compressor(cfg, out, man)
    man.verify_input("fit", out / "model.ldim")
    ens = dynamics.load(out / "model.ldim")
    pp = ParameterPoint(mu)
    in_domain = True
    try:
        problem.validate_param(pp)
    except DomainError as exc:
        in_domain = False
        log.warning("%s; extrapolating anyway", exc)

    pred_dir = out / "predict"
    pred_dir.mkdir(parents=True, exist_ok=True)
    tag = _mu_tag(problem, pp.values)

    with StageTimer() as timer:
        pred = predict(ens, compressor, problem, pp, cfg.solver,
                       check_domain=False)
        traj_path = pred_dir / f"{tag}.lsnap"
        snapshots.save(SnapshotMatrix(data=pred.states, params=[pp],
                                      n_time=problem.timegrid.n_steps),
                       traj_path)
        err = None
        reference = None
        if in_domain:
            reference = solve_fom(problem, pp).states
            err = max_relative_error(pred.states, reference)
            log.info("predict %s: max relative error %.4e", tuple(pp.values), err)
        profile_path = pred_dir / f"profile_{tag}.csv"
        _write_profile_csv(problem, pred.states, reference, profile_path)
        latent_path = pred_dir / f"latent_{tag}.csv"
        _write_latent_csv(problem, pred.latent, latent_path)

    man.record(f"predict[{tag}]", stage_digests(cfg)["fit"],
               [traj_path, profile_path, latent_path], timer.seconds)
    return pred, err


def _write_latent_csv(problem, latent, path) -> None:
    """Predicted latent trajectory: t, then one column per coordinate."""
    ts = problem.timegrid.instants()
    with open(path, "w") as f:
        f.write("t," + ",".join(f"z{i + 1}" for i in range(latent.shape[0])) + "\n")
        for n, t in enumerate(ts):
            row = ",".join(f"{v:.17g}" for v in latent[:, n])
            f.write(f"{t:.17g},{row}\n")


def _write_profile_csv(problem, states, reference, path) -> None:
    """Final-time profile: x (1D) or node index, prediction, optional ref."""
    n = states.shape[0]
    if len(problem.grid.axes) == 1 and problem.n_components == 1:
        lo, hi, nn = problem.grid.axes[0]
        coord = np.linspace(lo, hi, nn)
    else:
        coord = np.arange(n, dtype=float)
    with open(path, "w") as f:
        if reference is None:
            f.write("x,predicted\n")
            for x, v in zip(coord, states[:, -1]):
                f.write(f"{x:.17g},{v:.17g}\n")
        else:
            f.write("x,predicted,reference\n")
            for x, v, r in zip(coord, states[:, -1], reference[:, -1]):
                f.write(f"{x:.17g},{v:.17g},{r:.17g}\n")


def run_pipeline(cfg: RunConfig, out, jobs: int = 1) -> None:
    """All stages in order; the first failing stage aborts the run."""
    out = Path(out)
    man = load_manifest(out)
    stage_gen_fom(cfg, out, man, jobs=jobs)
    stage_compress(cfg, out, man)
    stage_fit(cfg, out, man)
    stage_evaluate(cfg, out, man, jobs=jobs)
