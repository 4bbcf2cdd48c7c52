"""Latent dynamics identification by least squares over function libraries.

Every fit solves dS^T ~ Theta(S^T) Xi for the coefficient matrix Xi, where
S is an n_s x (N_t+1) latent trajectory block, Theta evaluates the library
row-wise, and the derivative comes from second-order finite differences.
Three strategies share that core:

  global        one Xi from all training blocks stacked
  local         Xi refit per query from the n_DI nearest training blocks
  interpolated  per-point Xi_k blended at the query (rbf or bilinear)

With n_DI = n_mu the local strategy stacks the blocks in training order,
so it reproduces the global fit bit for bit.

Global fits optionally get a trajectory-refinement pass (refine_global)
that descends on integrated prediction error starting from the
least-squares solution; see that function for why.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .errors import ConfigError, InstabilityError, IntegrationError, ShapeError
from .interpolation import (build_rbf_interpolant, detect_uniform_grid,
                            evaluate_rbf, grid_cell, interpolate_bilinear)
from .library import LibrarySpec, build_library, latent_time_derivative, rescale
from .linalg import householder_lstsq

MAGIC_DIM = b"LADIM\x00\x00\x00"

STRATEGIES = ("global", "local", "interpolated")
INTERP_METHODS = ("rbf", "bilinear")

SPEC_FIELDS = ("latent_dim", "poly_degree", "include_cross_terms",
               "include_sin", "include_cos", "include_exp", "include_constant")

# trajectory refinement of global fits
REFINE_SAMPLES = 50       # target number of residual instants per trajectory
REFINE_MAX_ITER = 40
REFINE_RTOL = 1e-7        # inner integrations; looser than prediction defaults
REFINE_ATOL = 1e-10


@dataclass
class CoefficientMatrix:
    xi: np.ndarray        # (n_ell, n_s)
    spec: LibrarySpec
    scale: float = 1.0    # latent data was divided by this before fitting


def _as_block(block, n_s: int) -> np.ndarray:
    B = np.asarray(block, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != n_s:
        raise ShapeError(f"latent block must be ({n_s}, N_t+1), got {B.shape}")
    return B


def _fit_stacked(blocks, spec: LibrarySpec, dt: float, scale: float) -> CoefficientMatrix:
    thetas, rhs = [], []
    for b in blocks:
        B = _as_block(b, spec.latent_dim)
        thetas.append(build_library(B.T, spec))
        rhs.append(latent_time_derivative(B, dt).T)
    theta = np.vstack(thetas)
    if theta.shape[0] < spec.n_columns:
        warnings.warn(f"underdetermined fit: {theta.shape[0]} samples for "
                      f"{spec.n_columns} library columns")
    xi, _, deficient = householder_lstsq(theta, np.vstack(rhs))
    if deficient:
        names = spec.column_names()
        warnings.warn("rank-deficient library; minimum-norm solution over columns "
                      + ", ".join(names[c] for c in deficient))
    return CoefficientMatrix(xi=xi, spec=spec, scale=scale)


def fit_single(latent_block, spec: LibrarySpec, dt: float, scale: float = 1.0):
    return _fit_stacked([latent_block], spec, dt, scale)


def fit_global(latent_blocks, spec: LibrarySpec, dt: float, scale: float = 1.0):
    if not len(latent_blocks):
        raise ShapeError("fit_global needs at least one block")
    return _fit_stacked(list(latent_blocks), spec, dt, scale)


def _trajectory_residual(xi_flat, shape, spec, scale, blocks, instants,
                         weights, solver_cfg):
    """Stacked weighted misfit of the integrated fit against the blocks.

    None signals that the candidate coefficients blew up the integrator,
    which the caller treats as an infinitely bad trial point.
    """
    from .dopri import integrate_dopri  # imported here: dopri depends on us
    fit = CoefficientMatrix(xi=xi_flat.reshape(shape), spec=spec, scale=scale)
    parts = []
    for ref, w in zip(blocks, weights):
        try:
            Z = integrate_dopri(fit, ref[:, 0], instants, solver_cfg)
        except (IntegrationError, InstabilityError):
            return None
        parts.append(((Z - ref) / w).ravel())
    return np.concatenate(parts)


def refine_global(fit: CoefficientMatrix, latent_blocks, dt: float,
                  stride: int | None = None,
                  max_iter: int = REFINE_MAX_ITER) -> CoefficientMatrix:
    """Polish a global fit against the training trajectories themselves.

    The derivative regression minimizes pointwise slope misfit, which is not
    the quantity the model is judged on; with few training trajectories the
    shared fit can sacrifice one of them and the prediction error inflates
    well past the projection floor. This Levenberg-Marquardt pass keeps the
    library and model class fixed and descends on the integrated trajectory
    misfit instead, seeded at the least-squares solution. Residuals are
    per-snapshot latent errors scaled by the reference norms, so the
    objective mirrors the relative-error metric used for evaluation.
    """
    from .dopri import OdeSolverConfig
    blocks = [_as_block(b, fit.spec.latent_dim) for b in latent_blocks]
    n_cols = min(b.shape[1] for b in blocks)
    if n_cols < 2:
        return fit
    if stride is None:
        stride = max(1, n_cols // REFINE_SAMPLES)
    idx = np.arange(0, n_cols, max(int(stride), 1))
    if idx[-1] != n_cols - 1:
        idx = np.append(idx, n_cols - 1)
    instants = idx * float(dt)
    refs = [b[:, idx] for b in blocks]
    weights = []
    for r in refs:
        w = np.linalg.norm(r, axis=0)
        weights.append(np.maximum(w, 1e-8 * max(w.max(), 1e-300)))
    solver_cfg = OdeSolverConfig(rtol=REFINE_RTOL, atol=REFINE_ATOL)
    shape = fit.xi.shape
    theta = fit.xi.ravel().copy()
    args = (shape, fit.spec, fit.scale, refs, instants, weights, solver_cfg)
    r = _trajectory_residual(theta, *args)
    if r is None:
        warnings.warn("refinement skipped: seed coefficients do not integrate")
        return fit
    cost = float(r @ r)
    lam = 1e-4
    n_par = theta.size
    eye = np.eye(n_par)
    zeros = np.zeros(n_par)
    for _ in range(max_iter):
        J = np.empty((r.size, n_par))
        for j in range(n_par):
            h = 1e-6 * max(abs(theta[j]), 1.0)
            probe = theta.copy()
            probe[j] += h
            rj = _trajectory_residual(probe, *args)
            if rj is None:
                warnings.warn("refinement stopped on a failed Jacobian probe")
                return CoefficientMatrix(theta.reshape(shape), fit.spec, fit.scale)
            J[:, j] = (rj - r) / h
        improved = 0.0
        accepted = False
        for _ in range(10):
            A = np.vstack([J, np.sqrt(lam) * eye])
            b = np.concatenate([-r, zeros])
            step = householder_lstsq(A, b[:, None])[0][:, 0]
            trial = theta + step
            rt = _trajectory_residual(trial, *args)
            if rt is not None:
                c = float(rt @ rt)
                if c < cost:
                    improved = cost - c
                    theta, r, cost = trial, rt, c
                    lam = max(lam * 0.3, 1e-12)
                    accepted = True
                    break
            lam *= 10.0
        if not accepted or improved <= 1e-10 * max(cost, 1e-300):
            break
    return CoefficientMatrix(theta.reshape(shape), fit.spec, fit.scale)


def nearest_training(query, train_params, n_di: int) -> np.ndarray:
    """Indices of the n_di nearest training points, nearest first.

    Euclidean distance; ties broken by ascending training index (stable sort).
    """
    P = np.atleast_2d(np.asarray(train_params, dtype=np.float64))
    q = np.asarray(tuple(query) if hasattr(query, "__iter__") else query,
                   dtype=np.float64)
    if not 1 <= n_di <= len(P):
        raise ConfigError(f"n_di must lie in 1..{len(P)}, got {n_di}")
    d = np.linalg.norm(P - q, axis=1)
    return np.argsort(d, kind="stable")[:n_di]


@dataclass
class DiEnsemble:
    strategy: str
    spec: LibrarySpec
    train_params: np.ndarray                 # (n_mu, p)
    dt: float
    scale: float = 1.0
    n_di: int | None = None                  # None: all training points
    method: str = "rbf"                      # interpolated only
    global_fit: CoefficientMatrix | None = None
    point_fits: list[CoefficientMatrix] | None = None
    blocks: list[np.ndarray] | None = None   # retained for local refits
    meta: dict = field(default_factory=dict)
    _region_cache: dict = field(default_factory=dict, repr=False)
    _interp_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_mu(self) -> int:
        return len(self.train_params)

    def effective_n_di(self) -> int:
        return self.n_mu if self.n_di is None else self.n_di


def fit_ensemble(latent_blocks, train_params, spec: LibrarySpec, dt: float,
                 strategy: str = "global", n_di: int | None = None,
                 method: str = "rbf", use_rescale: bool = False,
                 refine: bool = False) -> DiEnsemble:
    """Fit a DI model of the chosen strategy from per-parameter latent blocks."""
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if refine and strategy != "global":
        raise ConfigError("refine applies to the global strategy only")
    P = np.atleast_2d(np.asarray(train_params, dtype=np.float64))
    blocks = [_as_block(b, spec.latent_dim) for b in latent_blocks]
    if len(blocks) != len(P):
        raise ShapeError(f"{len(blocks)} blocks for {len(P)} training points")
    if n_di is not None and not 1 <= n_di <= len(P):
        raise ConfigError(f"n_di must lie in 1..{len(P)}, got {n_di}")
    if use_rescale:
        blocks, scale = rescale(blocks)
    else:
        scale = 1.0
    ens = DiEnsemble(strategy=strategy, spec=spec, train_params=P, dt=dt,
                     scale=scale, n_di=n_di, method=method)
    if strategy == "global":
        ens.global_fit = _fit_stacked(blocks, spec, dt, scale)
        if refine:
            ens.global_fit = refine_global(ens.global_fit, blocks, dt)
            ens.meta["refined"] = True
    elif strategy == "local":
        ens.blocks = blocks
    else:
        if method not in INTERP_METHODS:
            raise ConfigError(f"unknown interpolation method {method!r}; "
                              f"choose from {INTERP_METHODS}")
        if method == "bilinear":
            detect_uniform_grid(P)  # fail fast on non-grid training sets
        ens.point_fits = [_fit_stacked([b], spec, dt, scale) for b in blocks]
    return ens


def coefficients_for(ens: DiEnsemble, query) -> CoefficientMatrix:
    """Coefficient matrix the ensemble assigns to a query parameter point."""
    if ens.strategy == "global":
        return ens.global_fit
    if ens.strategy == "local":
        idx = nearest_training(query, ens.train_params, ens.effective_n_di())
        key = tuple(sorted(int(i) for i in idx))
        hit = ens._region_cache.get(key)
        if hit is None:
            hit = _fit_stacked([ens.blocks[i] for i in key], ens.spec, ens.dt,
                               ens.scale)
            ens._region_cache[key] = hit
        return hit
    if ens.method == "bilinear":
        xs, ys, index = detect_uniform_grid(ens.train_params)
        ids, corners = grid_cell(xs, ys, index, tuple(query))
        xi = interpolate_bilinear(tuple(query), [ens.point_fits[k].xi for k in ids],
                                  corners)
    else:
        idx = nearest_training(query, ens.train_params, ens.effective_n_di())
        key = tuple(sorted(int(i) for i in idx))
        interp = ens._interp_cache.get(key)
        if interp is None:
            interp = build_rbf_interpolant(ens.train_params[list(key)],
                                           [ens.point_fits[k].xi for k in key])
            ens._interp_cache[key] = interp
        xi = evaluate_rbf(interp, tuple(query))
    return CoefficientMatrix(xi=xi, spec=ens.spec, scale=ens.scale)


def format_ode(fit: CoefficientMatrix) -> str:
    """Identified system as text, one line per latent coordinate."""
    names = fit.spec.column_names()
    floor = 1e-10 * max(float(np.abs(fit.xi).max()), 1e-300)
    lines = []
    for i in range(fit.xi.shape[1]):
        parts = []
        for j, name in enumerate(names):
            c = fit.xi[j, i]
            if abs(c) <= floor:
                continue
            mag = f"{abs(c):.4g}" if name == "1" else f"{abs(c):.4g}*{name}"
            parts.append(("- " if c < 0 else "+ ") + mag)
        if parts:
            expr = " ".join(parts)
            expr = expr[2:] if expr[0] == "+" else "-" + expr[2:]
        else:
            expr = "0"
        lines.append(f"dz{i + 1}/dt = {expr}")
    return "\n".join(lines)


def save(ens: DiEnsemble, path) -> None:
    spec = ens.spec
    meta = dict(ens.meta)
    meta.update(strategy=ens.strategy, dt=ens.dt, scale=ens.scale,
                n_di=ens.n_di, method=ens.method,
                spec={k: getattr(spec, k) for k in SPEC_FIELDS})
    if ens.strategy == "global":
        arrays = [("global_xi", ens.global_fit.xi)]
    elif ens.strategy == "local":
        arrays = [("blocks", np.stack(ens.blocks, axis=2))]
    else:
        arrays = [("point_xi", np.stack([f.xi for f in ens.point_fits], axis=2))]
    write_container(path, MAGIC_DIM,
                    [spec.n_columns, spec.latent_dim, *ens.train_params.shape],
                    ens.train_params.ravel(), meta, arrays)


def load(path) -> DiEnsemble:
    dims, params, meta, arrays, _ = read_container(path, MAGIC_DIM)
    _, _, n_mu, p_dim = (int(d) for d in dims)
    spec = LibrarySpec(**meta["spec"])
    ens = DiEnsemble(strategy=meta["strategy"], spec=spec,
                     train_params=params.reshape(n_mu, p_dim), dt=meta["dt"],
                     scale=meta["scale"], n_di=meta["n_di"], method=meta["method"],
                     meta={k: v for k, v in meta.items()
                           if k not in ("strategy", "dt", "scale", "n_di", "method",
                                        "spec", "arrays", "raw")})
    if ens.strategy == "global":
        ens.global_fit = CoefficientMatrix(arrays["global_xi"], spec, ens.scale)
    elif ens.strategy == "local":
        ens.blocks = [arrays["blocks"][:, :, k] for k in range(n_mu)]
    else:
        ens.point_fits = [CoefficientMatrix(arrays["point_xi"][:, :, k], spec,
                                            ens.scale) for k in range(n_mu)]
    return ens
