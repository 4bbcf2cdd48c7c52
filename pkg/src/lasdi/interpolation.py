"""Parameter-space interpolation of per-point fit results.

Two schemes: multiquadric radial basis functions for arbitrary center
layouts, and bilinear cell interpolation when the training parameters
form a full uniform rectangular grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, ShapeError, SolverError
from .linalg import householder_lstsq

EPS_RETRIES = 5


def multiquadric(d, eps: float):
    return np.sqrt(d * d / (eps * eps) + 1.0)


@dataclass
class RbfInterpolant:
    centers: np.ndarray   # (n, p)
    weights: np.ndarray   # (n, n_values), one column per interpolated entry
    eps: float
    value_shape: tuple


def build_rbf_interpolant(centers, values) -> RbfInterpolant:
    """Solve one shared collocation system for every entry of the values.

    values: sequence of equally shaped arrays, one per center. eps is the
    mean pairwise center distance; a singular collocation matrix retries
    with eps scaled by 1.01 up to 5 times.
    """
    C = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    n = C.shape[0]
    if n < 2:
        raise ConfigError(f"rbf interpolation needs at least 2 centers, got {n}")
    if len(values) != n:
        raise ShapeError(f"{len(values)} value sets for {n} centers")
    diff = C[:, None, :] - C[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    off = ~np.eye(n, dtype=bool)
    if d[off].min() == 0.0:
        raise ConfigError("rbf centers must be distinct")
    value_shape = np.shape(values[0])
    V = np.stack([np.asarray(v, dtype=np.float64).ravel() for v in values])
    eps0 = float(d[off].mean())
    tol = 1e-8 * max(1.0, float(np.abs(V).max()))
    for attempt in range(EPS_RETRIES + 1):
        eps = eps0 * 1.01 ** attempt
        psi = multiquadric(d, eps)
        lam, rank, _ = householder_lstsq(psi, V)
        if rank == n and np.abs(psi @ lam - V).max() <= tol:
            return RbfInterpolant(centers=C, weights=lam, eps=eps,
                                  value_shape=value_shape)
    raise SolverError("rbf collocation matrix stayed singular after "
                      f"{EPS_RETRIES} eps perturbations")


def evaluate_rbf(interp: RbfInterpolant, query) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    diff = interp.centers - q
    d = np.sqrt((diff * diff).sum(axis=1))
    out = multiquadric(d, interp.eps) @ interp.weights
    return out.reshape(interp.value_shape)


def interpolate_rbf(query, values, centers) -> np.ndarray:
    return evaluate_rbf(build_rbf_interpolant(centers, values), query)


def interpolate_bilinear(query, values, corners) -> np.ndarray:
    """Blend four corner values of an axis-aligned rectangle containing query.

    Weights pair each corner with the opposite sub-rectangle area, so the
    scheme is exact for functions of the form a + bx + cy + dxy.
    """
    C = np.asarray(corners, dtype=np.float64)
    if C.shape != (4, 2):
        raise ShapeError(f"four 2-D corners expected, got shape {C.shape}")
    xs = np.unique(C[:, 0])
    ys = np.unique(C[:, 1])
    if len(xs) != 2 or len(ys) != 2 or \
            {(x, y) for x, y in C} != {(x, y) for x in xs for y in ys}:
        raise ConfigError("corners must form an axis-aligned rectangle")
    qx, qy = np.asarray(query, dtype=np.float64)
    if not (xs[0] <= qx <= xs[1] and ys[0] <= qy <= ys[1]):
        raise DomainError(f"query ({qx}, {qy}) outside the corner rectangle; "
                          "refusing to extrapolate")
    tx = (qx - xs[0]) / (xs[1] - xs[0])
    ty = (qy - ys[0]) / (ys[1] - ys[0])
    out = np.zeros_like(np.asarray(values[0], dtype=np.float64))
    for (cx, cy), v in zip(C, values):
        w = (tx if cx == xs[1] else 1.0 - tx) * (ty if cy == ys[1] else 1.0 - ty)
        out += w * np.asarray(v, dtype=np.float64)
    return out


def detect_uniform_grid(params, rtol: float = 1e-9):
    """Check a 2-D training set fills a uniform rectangular grid.

    Returns (xs, ys, index) with index[i, j] = training index of grid node
    (xs[i], ys[j]). Raises ConfigError when the set is not such a grid.
    """
    P = np.asarray(params, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != 2:
        raise ConfigError("bilinear interpolation needs a 2-D parameter space")
    xs = np.unique(P[:, 0])
    ys = np.unique(P[:, 1])
    if len(xs) < 2 or len(ys) < 2 or len(xs) * len(ys) != len(P):
        raise ConfigError(f"{len(P)} training points do not fill a "
                          f"{len(xs)} x {len(ys)} grid")
    for v in (xs, ys):
        steps = np.diff(v)
        if np.abs(steps - steps[0]).max() > rtol * np.abs(v).max():
            raise ConfigError("training grid spacing is not uniform")
    index = np.full((len(xs), len(ys)), -1, dtype=np.int64)
    for k, (x, y) in enumerate(P):
        index[np.searchsorted(xs, x), np.searchsorted(ys, y)] = k
    return xs, ys, index


def grid_cell(xs, ys, index, query):
    """Training indices and coordinates of the grid cell containing query."""
    qx, qy = np.asarray(query, dtype=np.float64)
    if not (xs[0] <= qx <= xs[-1] and ys[0] <= qy <= ys[-1]):
        raise DomainError(f"query ({qx}, {qy}) outside the training grid; "
                          "refusing to extrapolate")
    i = min(int(np.searchsorted(xs, qx, side="right")) - 1, len(xs) - 2)
    j = min(int(np.searchsorted(ys, qy, side="right")) - 1, len(ys) - 2)
    i = max(i, 0)
    j = max(j, 0)
    ids = [index[i, j], index[i + 1, j], index[i, j + 1], index[i + 1, j + 1]]
    corners = np.array([(xs[i], ys[j]), (xs[i + 1], ys[j]),
                        (xs[i], ys[j + 1]), (xs[i + 1], ys[j + 1])])
    return ids, corners
