"""Candidate-function libraries and latent time-derivative estimation.

A library maps a latent state z in R^{n_s} to a row of n_ell candidate
functions. Columns are ordered: constant, then monomials by total degree
(graded lexicographic within each degree, z1 before z2), then sin(z_i),
cos(z_i), exp(z_i) blocks. This order is part of the .ldim file contract;
exponents() is the single source of truth for the polynomial part and the
integrator kernel consumes the same matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb

import numpy as np
from numba import njit

from .errors import ConfigError, ShapeError

MAX_POLY_DEGREE = 5


@dataclass(frozen=True)
class LibrarySpec:
    latent_dim: int
    poly_degree: int = 1
    include_cross_terms: bool = True
    include_sin: bool = False
    include_cos: bool = False
    include_exp: bool = False
    include_constant: bool = True

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ConfigError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if not 0 <= self.poly_degree <= MAX_POLY_DEGREE:
            raise ConfigError(f"poly_degree must lie in 0..{MAX_POLY_DEGREE}, "
                              f"got {self.poly_degree}")
        if self.n_columns == 0:
            raise ConfigError("library has no columns; enable at least one term kind")

    @property
    def n_columns(self) -> int:
        n, deg = self.latent_dim, self.poly_degree
        if self.include_cross_terms:
            npoly = sum(comb(n + d - 1, d) for d in range(1, deg + 1))
        else:
            npoly = deg * n
        return (int(self.include_constant) + npoly
                + n * (self.include_sin + self.include_cos + self.include_exp))

    def exponents(self) -> np.ndarray:
        """Monomial exponent rows, constant (all-zero row) first when enabled."""
        n, deg = self.latent_dim, self.poly_degree
        rows = [np.zeros(n, dtype=np.int64)] if self.include_constant else []
        for d in range(1, deg + 1):
            if self.include_cross_terms:
                for combo in combinations_with_replacement(range(n), d):
                    e = np.zeros(n, dtype=np.int64)
                    for i in combo:
                        e[i] += 1
                    rows.append(e)
            else:
                for i in range(n):
                    e = np.zeros(n, dtype=np.int64)
                    e[i] = d
                    rows.append(e)
        return np.array(rows, dtype=np.int64).reshape(len(rows), n)

    def column_names(self) -> list[str]:
        names = []
        for e in self.exponents():
            if not e.any():
                names.append("1")
                continue
            parts = []
            for i, p in enumerate(e):
                if p == 1:
                    parts.append(f"z{i + 1}")
                elif p > 1:
                    parts.append(f"z{i + 1}^{p}")
            names.append("*".join(parts))
        for tag, on in (("sin", self.include_sin), ("cos", self.include_cos),
                        ("exp", self.include_exp)):
            if on:
                names += [f"{tag}(z{i + 1})" for i in range(self.latent_dim)]
        return names


def build_library(latent_rows, spec: LibrarySpec) -> np.ndarray:
    """Theta matrix: one library row per latent state row."""
    Z = np.asarray(latent_rows, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != spec.latent_dim:
        raise ShapeError(f"latent rows must be (*, {spec.latent_dim}), got {Z.shape}")
    cols = []
    expo = spec.exponents()
    if expo.shape[0]:
        cols.append(np.prod(Z[:, None, :] ** expo[None, :, :], axis=2))
    if spec.include_sin:
        cols.append(np.sin(Z))
    if spec.include_cos:
        cols.append(np.cos(Z))
    if spec.include_exp:
        cols.append(np.exp(Z))
    return np.hstack(cols)


@njit(cache=True)
def theta_row(z, expo, has_sin, has_cos, has_exp, out):
    """Single library row, kernel-side twin of build_library."""
    m = expo.shape[0]
    n = z.shape[0]
    for j in range(m):
        v = 1.0
        for i in range(n):
            for _ in range(expo[j, i]):
                v *= z[i]
        out[j] = v
    k = m
    if has_sin:
        for i in range(n):
            out[k] = np.sin(z[i])
            k += 1
    if has_cos:
        for i in range(n):
            out[k] = np.cos(z[i])
            k += 1
    if has_exp:
        for i in range(n):
            out[k] = np.exp(z[i])
            k += 1


def latent_time_derivative(latent_block, dt: float) -> np.ndarray:
    """d/dt of an n_s x (N_t+1) block: 2nd-order central differences inside,
    3-point one-sided at both ends."""
    B = np.asarray(latent_block, dtype=np.float64)
    if B.ndim != 2 or B.shape[1] < 3:
        raise ShapeError("time derivative needs at least 3 instants (N_t >= 2), "
                         f"got shape {B.shape}")
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    return np.gradient(B, dt, axis=1, edge_order=2)


def rescale(latent_blocks):
    """Divide all blocks by one shared scalar s = max |entry| over the blocks.

    Returns (scaled blocks, s). All-zero data keeps s = 1 with a warning.
    The same s must divide initial conditions and multiply reconstructions
    at prediction time.
    """
    blocks = [np.asarray(b, dtype=np.float64) for b in latent_blocks]
    if not blocks:
        raise ShapeError("rescale needs at least one block")
    s = max(float(np.abs(b).max()) for b in blocks)
    if s == 0.0:
        warnings.warn("all latent entries are zero; rescale factor kept at 1")
        return blocks, 1.0
    return [b / s for b in blocks], s
