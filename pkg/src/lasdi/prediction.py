"""Latent prediction at query parameters and the error/speedup metrics.

Prediction never touches the FOM solver: the initial condition function is
evaluated at the query parameter, compressed to a latent state, integrated
under the identified dynamics, and decoded back. When a shared rescale
factor s is active the latent initial condition is divided by s and the
integrated latent states are multiplied by s before decoding; for a linear
(POD) decoder this is the same as scaling the reconstruction, for the
autoencoder the unscale has to happen before the nonlinear decode.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .autoencoder import Autoencoder, ae_decode, ae_encode
from .dopri import OdeSolverConfig, integrate_dopri
from .dynamics import DiEnsemble, coefficients_for
from .errors import DomainError, LasdiError, ShapeError
from .fom import initial_condition, solve_fom
from .pod import PodBasis, pod_decode, pod_encode
from .problems import ParameterPoint, PdeProblem

log = logging.getLogger("lasdi.prediction")

LOWER_BOUND_SLACK = 1e-12


def encode_state(compressor, states) -> np.ndarray:
    if isinstance(compressor, PodBasis):
        return pod_encode(compressor, states)
    if isinstance(compressor, Autoencoder):
        return ae_encode(compressor, states)
    raise ShapeError(f"unknown compressor type {type(compressor).__name__}")


def decode_state(compressor, latent) -> np.ndarray:
    if isinstance(compressor, PodBasis):
        return pod_decode(compressor, latent)
    if isinstance(compressor, Autoencoder):
        return ae_decode(compressor, latent)
    raise ShapeError(f"unknown compressor type {type(compressor).__name__}")


def latent_initial_condition(compressor, full_state, scale: float = 1.0) -> np.ndarray:
    return encode_state(compressor, full_state) / scale


def reconstruct(compressor, latent_traj, scale: float = 1.0) -> np.ndarray:
    return decode_state(compressor, scale * np.asarray(latent_traj, dtype=np.float64))


@dataclass
class PredictedTrajectory:
    param: ParameterPoint
    latent: np.ndarray   # (n_s, N_t+1) in fitted (scaled) coordinates
    states: np.ndarray   # (N_s, N_t+1)
    scale: float = 1.0


def predict(ensemble: DiEnsemble, compressor, problem: PdeProblem, param,
            solver_config: OdeSolverConfig | None = None,
            check_domain: bool = True) -> PredictedTrajectory:
    """Full LaSDI prediction at one parameter point."""
    pp = param if isinstance(param, ParameterPoint) else ParameterPoint(param)
    u0 = initial_condition(problem, pp, check_domain=check_domain)
    z0 = latent_initial_condition(compressor, u0, ensemble.scale)
    fit = coefficients_for(ensemble, pp.values)
    latent = integrate_dopri(fit, z0, problem.timegrid, solver_config)
    states = reconstruct(compressor, latent, ensemble.scale)
    return PredictedTrajectory(param=pp, latent=latent, states=states,
                               scale=ensemble.scale)


def max_relative_error(predicted, reference) -> float:
    """max over n in 1..N_t of ||u_hat^n - u^n||_2 / ||u^n||_2 (n=0 excluded)."""
    P = np.asarray(predicted, dtype=np.float64)
    R = np.asarray(reference, dtype=np.float64)
    if P.shape != R.shape or P.ndim != 2 or P.shape[1] < 2:
        raise ShapeError(f"need equal (N_s, N_t+1) trajectories with N_t >= 1, "
                         f"got {P.shape} and {R.shape}")
    norms = np.linalg.norm(R[:, 1:], axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DomainError(f"reference column n={zero[0] + 1} has zero norm; "
                          "relative error undefined")
    return float((np.linalg.norm(P[:, 1:] - R[:, 1:], axis=0) / norms).max())


def assert_pod_lower_bound(basis: PodBasis, predicted, reference) -> None:
    """Reconstruction error can never beat the orthogonal projection error."""
    diff = np.linalg.norm(predicted - reference, axis=0)
    proj = basis.phi @ (basis.phi.T @ reference) - reference
    proj_norm = np.linalg.norm(proj, axis=0)
    worst = float((proj_norm - diff).max())
    assert worst <= LOWER_BOUND_SLACK, \
        f"projection lower bound violated by {worst:.3e}"


@dataclass
class ErrorReport:
    test_params: np.ndarray          # (n_test, p)
    errors: np.ndarray               # (n_test,), NaN marks a failed point
    failures: list                   # (test index, message) pairs
    axis_values: tuple | None = None  # (xs, ys) when the set fills a 2-D grid

    @property
    def worst(self) -> float:
        ok = self.errors[np.isfinite(self.errors)]
        return float(ok.max()) if ok.size else float("nan")

    @property
    def best(self) -> float:
        ok = self.errors[np.isfinite(self.errors)]
        return float(ok.min()) if ok.size else float("nan")

    @property
    def n_failed(self) -> int:
        return int(np.isnan(self.errors).sum())


@dataclass
class SpeedupReport:
    fom_seconds: float    # mean wall seconds per FOM solve
    lasdi_seconds: float  # mean wall seconds per prediction (IC + ODE + decode)

    @property
    def ratio(self) -> float:
        return self.fom_seconds / self.lasdi_seconds


def _grid_layout(params: np.ndarray):
    """(xs, ys) when params enumerate a full 2-D tensor grid, else None."""
    if params.ndim != 2 or params.shape[1] != 2 or not len(params):
        return None
    xs = np.unique(params[:, 0])
    ys = np.unique(params[:, 1])
    if len(xs) * len(ys) != len(params):
        return None
    seen = {(x, y) for x, y in params}
    if seen != {(x, y) for x in xs for y in ys}:
        return None
    return xs, ys


def evaluate_testset(ensemble: DiEnsemble, compressor, problem: PdeProblem,
                     test_params, solver_config: OdeSolverConfig | None = None,
                     references: dict | None = None):
    """Sweep the test set; failed points become NaN cells, never aborts.

    references maps parameter tuples to precomputed FOM state arrays; it is
    both consulted and filled, so repeated sweeps reuse solves. Returns
    (ErrorReport, SpeedupReport); the speedup means cover only this sweep's
    fresh FOM solves and successful predictions.
    """
    P = np.atleast_2d(np.asarray(test_params, dtype=np.float64))
    if P.size == 0:
        P = P.reshape(0, 2)
    errors = np.full(len(P), np.nan)
    failures = []
    fom_times = []
    lasdi_times = []
    for i, row in enumerate(P):
        key = tuple(row)
        try:
            ref = references.get(key) if references is not None else None
            if ref is None:
                t0 = time.perf_counter()
                ref = solve_fom(problem, ParameterPoint(row)).states
                fom_times.append(time.perf_counter() - t0)
                if references is not None:
                    references[key] = ref
            t0 = time.perf_counter()
            pred = predict(ensemble, compressor, problem, row, solver_config)
            lasdi_times.append(time.perf_counter() - t0)
            if isinstance(compressor, PodBasis):
                assert_pod_lower_bound(compressor, pred.states, ref)
            errors[i] = max_relative_error(pred.states, ref)
        except LasdiError as exc:
            failures.append((i, f"{type(exc).__name__}: {exc}"))
            log.warning("test point %s failed: %s", tuple(row), exc)
    report = ErrorReport(test_params=P, errors=errors, failures=failures,
                         axis_values=_grid_layout(P))
    speed = SpeedupReport(
        fom_seconds=float(np.mean(fom_times)) if fom_times else float("nan"),
        lasdi_seconds=float(np.mean(lasdi_times)) if lasdi_times else float("nan"))
    return report, speed


def write_heatmap_csv(report: ErrorReport, path) -> None:
    """Grid layout: header row = first-parameter values; one row per
    second-parameter value. One-parameter sets write a single data row."""
    P = report.test_params
    with open(path, "w") as f:
        if report.axis_values is not None:
            xs, ys = report.axis_values
            cell = {(x, y): e for (x, y), e in zip(map(tuple, P), report.errors)}
            f.write("," + ",".join(f"{x:.17g}" for x in xs) + "\n")
            for y in ys:
                row = ",".join(f"{cell[(x, y)]:.17g}" for x in xs)
                f.write(f"{y:.17g},{row}\n")
        else:
            f.write("," + ",".join(f"{x:.17g}" for x in P[:, 0]) + "\n")
            f.write("0," + ",".join(f"{e:.17g}" for e in report.errors) + "\n")


def write_summary_csv(report: ErrorReport, speed: SpeedupReport, path) -> None:
    with open(path, "w") as f:
        f.write("n_test,n_failed,min_error,max_error,fom_seconds,"
                "lasdi_seconds,speedup\n")
        f.write(f"{len(report.errors)},{report.n_failed},{report.best:.17g},"
                f"{report.worst:.17g},{speed.fom_seconds:.17g},"
                f"{speed.lasdi_seconds:.17g},{speed.ratio:.17g}\n")
