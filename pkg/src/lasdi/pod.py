"""POD compression by the method of snapshots.

The Gram matrix of the snapshot set is diagonalized by cyclic Jacobi
rotations, applied in one-sided form on whichever side of S is smaller
(columns of S itself, or columns of S^T). sigma_i = sqrt(eigenvalue);
basis columns come out as S v_i / sigma_i. Eigenvalues below 1e-12 of the
largest are treated as numerically rank deficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .errors import RankError, ShapeError
from .linalg import mgs_orthonormalize, onesided_jacobi
from .snapshots import SnapshotMatrix

MAGIC_POD = b"LAPOD\x00\x00\x00"

RANK_RTOL = 1e-12  # eigenvalue ratio below which modes are excluded


@dataclass
class PodBasis:
    phi: np.ndarray          # (N_s, n_s), orthonormal columns
    sigma: np.ndarray        # full singular value list, nonincreasing
    rank: int
    meta: dict = field(default_factory=dict)

    @property
    def n_s(self) -> int:
        return self.phi.shape[1]

    @property
    def n_space(self) -> int:
        return self.phi.shape[0]


def compute_pod(snapshots: SnapshotMatrix, n_s: int) -> PodBasis:
    S = snapshots.data
    n_space, n_cols = S.shape
    if not 1 <= n_s:
        raise RankError(f"n_s must be positive, got {n_s}")
    if n_s >= n_cols:
        raise RankError(f"n_s={n_s} must be smaller than the column count {n_cols}")

    # zero guards only to dodge divide warnings; a zero leading sigma means
    # n_s > rank and the RankError below fires before phi is ever used
    if n_space >= n_cols:
        # diagonalize S^T S implicitly; rotated columns converge to sigma_i u_i
        Q, sigma = onesided_jacobi(S)
        lead = np.where(sigma[:n_s] > 0, sigma[:n_s], 1.0)
        phi = Q[:, :n_s] / lead
    else:
        # diagonalize S S^T implicitly; rotated columns of S^T give sigma_i v_i
        Q, sigma = onesided_jacobi(S.T)
        lead = np.where(sigma[:n_s] > 0, sigma[:n_s], 1.0)
        phi = (S @ (Q[:, :n_s] / lead)) / lead

    lam_max = sigma[0] ** 2 if sigma.size else 0.0
    rank = int((sigma**2 > RANK_RTOL * lam_max).sum()) if lam_max > 0 else 0
    if n_s > rank:
        raise RankError(
            f"n_s={n_s} exceeds the numerical rank {rank} "
            f"(eigenvalue cutoff {RANK_RTOL:.0e} of the largest)"
        )
    mgs_orthonormalize(phi)
    return PodBasis(
        phi=phi,
        sigma=sigma,
        rank=rank,
        meta={"n_cols": n_cols, **snapshots.meta},
    )


def pod_encode(basis: PodBasis, states: np.ndarray) -> np.ndarray:
    states = np.asarray(states)
    if states.shape[0] != basis.n_space:
        raise ShapeError(
            f"states have {states.shape[0]} rows, basis expects {basis.n_space}"
        )
    return basis.phi.T @ states


def pod_decode(basis: PodBasis, latent: np.ndarray) -> np.ndarray:
    latent = np.asarray(latent)
    if latent.shape[0] != basis.n_s:
        raise ShapeError(
            f"latent has {latent.shape[0]} rows, basis expects {basis.n_s}"
        )
    return basis.phi @ latent


def singular_value_mass(basis: PodBasis, n_s: int) -> float:
    """Retained singular value mass: sum of the first n_s over the total."""
    if n_s > basis.sigma.size:
        raise ShapeError(f"n_s={n_s} exceeds retained sigma count {basis.sigma.size}")
    total = basis.sigma.sum()
    return float(basis.sigma[:n_s].sum() / total) if total > 0 else 1.0


def save(basis: PodBasis, path) -> None:
    write_container(
        path,
        MAGIC_POD,
        dims=[basis.n_space, basis.n_s, basis.sigma.size, basis.rank],
        params=[],
        meta=dict(basis.meta),
        arrays=[("phi", basis.phi), ("sigma", basis.sigma)],
    )


def load(path) -> PodBasis:
    dims, _, meta, arrays, _ = read_container(path, MAGIC_POD)
    n_space, n_s, n_sigma, rank = dims
    phi = arrays["phi"]
    sigma = arrays["sigma"].ravel()
    if phi.shape != (n_space, n_s) or sigma.size != n_sigma:
        raise ShapeError(f"{path}: payload shapes inconsistent with header")
    meta = {k: v for k, v in meta.items() if k not in ("arrays", "raw")}
    return PodBasis(phi=phi, sigma=sigma, rank=int(rank), meta=meta)
