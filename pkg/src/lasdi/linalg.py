"""Dense kernels written against explicit algorithms, not LAPACK wrappers.

householder_lstsq   least squares via Householder QR; on rank deficiency it
                    falls back to column-pivoted QR plus a complete orthogonal
                    decomposition and returns the minimum-norm solution.
jacobi_eigh         symmetric eigendecomposition by cyclic Jacobi rotations
                    with a threshold schedule; converges unconditionally.
onesided_jacobi     the same cyclic Jacobi iteration applied in one-sided
                    (Hestenes) form to a data matrix: each column-pair
                    rotation is exactly the Gram-matrix Jacobi rotation,
                    applied implicitly. Contiguous memory access makes this
                    the fast path for large Grams.
mgs_orthonormalize  modified Gram-Schmidt polish for near-orthonormal bases.

Test suites cross-check these against LAPACK-based oracles; the library code
itself never calls numpy.linalg solvers.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ConvergenceError


def _apply_reflectors_qr(R, C):
    """In-place Householder QR of R, reflectors applied to C as they form."""
    m, n = R.shape
    for j in range(min(m - 1, n)):
        x = R[j:, j]
        normx = np.sqrt(x @ x)
        if normx == 0.0:
            continue
        alpha = -normx if x[0] >= 0 else normx
        v = x.copy()
        v[0] -= alpha
        vsq = v @ v
        if vsq == 0.0:
            continue
        beta = 2.0 / vsq
        R[j:, j:] -= np.outer(beta * v, v @ R[j:, j:])
        C[j:, :] -= np.outer(beta * v, v @ C[j:, :])
        R[j + 1 :, j] = 0.0  # zero the annihilated part explicitly
        R[j, j] = alpha


def _back_substitute(R, C):
    n = R.shape[1]
    X = np.empty((n, C.shape[1]))
    for i in range(n - 1, -1, -1):
        X[i] = (C[i] - R[i, i + 1 :] @ X[i + 1 :]) / R[i, i]
    return X


def _forward_substitute_lower(L, C):
    n = L.shape[0]
    X = np.empty((n, C.shape[1]))
    for i in range(n):
        X[i] = (C[i] - L[i, :i] @ X[:i]) / L[i, i]
    return X


def householder_lstsq(A, B, rank_tol=None):
    """Solve min ||A X - B||_F columnwise.

    Returns (X, rank, deficient_cols). Full-rank systems go through plain
    Householder QR; rank-deficient ones are re-solved with column pivoting
    and a complete orthogonal decomposition (minimum-norm solution).
    deficient_cols lists the original column indices pivoted out of the basis.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    squeeze = B.ndim == 1
    if squeeze:
        B = B[:, None]
    m, n = A.shape
    if m < n:
        raise ValueError(f"need m >= n, got {A.shape}")

    R = A.copy()
    C = B.copy()
    _apply_reflectors_qr(R, C)
    diag = np.abs(np.diag(R[:n, :n]))
    tol = rank_tol if rank_tol is not None else max(m, n) * np.finfo(float).eps * (
        diag.max() if diag.size else 0.0
    )
    if diag.size and diag.min() > tol:
        X = _back_substitute(R[:n, :n], C[:n])
        return (X[:, 0] if squeeze else X), n, []

    # rank deficient: column-pivoted QR, then orthogonalize the short rows
    R = A.copy()
    C = B.copy()
    perm = np.arange(n)
    col_norms = (R * R).sum(axis=0)
    for j in range(min(m - 1, n)):
        piv = j + int(np.argmax(col_norms[j:]))
        if piv != j:
            R[:, [j, piv]] = R[:, [piv, j]]
            perm[[j, piv]] = perm[[piv, j]]
            col_norms[[j, piv]] = col_norms[[piv, j]]
        x = R[j:, j]
        normx = np.sqrt(x @ x)
        if normx > 0.0:
            alpha = -normx if x[0] >= 0 else normx
            v = x.copy()
            v[0] -= alpha
            vsq = v @ v
            if vsq > 0.0:
                beta = 2.0 / vsq
                R[j:, j:] -= np.outer(beta * v, v @ R[j:, j:])
                C[j:, :] -= np.outer(beta * v, v @ C[j:, :])
                R[j + 1 :, j] = 0.0
                R[j, j] = alpha
        col_norms[j:] -= R[j, j:] ** 2
        np.clip(col_norms, 0.0, None, out=col_norms)

    diag = np.abs(np.diag(R[:n, :n]))
    dmax = diag.max() if diag.size else 0.0
    tol = rank_tol if rank_tol is not None else max(m, n) * np.finfo(float).eps * dmax
    r = int((diag > tol).sum())
    if r == 0:
        X = np.zeros((n, B.shape[1]))
        return (X[:, 0] if squeeze else X), 0, sorted(perm.tolist())

    # complete orthogonal decomposition: QR of the trapezoid's transpose,
    # keeping the reflectors so Q2 can be formed explicitly (n, r are small)
    T2 = R[:r, :].T.copy()  # n x r
    refl = []
    for j in range(min(n - 1, r)):
        x = T2[j:, j]
        normx = np.sqrt(x @ x)
        if normx == 0.0:
            refl.append(None)
            continue
        alpha = -normx if x[0] >= 0 else normx
        v = x.copy()
        v[0] -= alpha
        vsq = v @ v
        if vsq == 0.0:
            refl.append(None)
            continue
        beta = 2.0 / vsq
        T2[j:, j:] -= np.outer(beta * v, v @ T2[j:, j:])
        T2[j + 1 :, j] = 0.0
        T2[j, j] = alpha
        refl.append((j, v, beta))
    E = np.eye(n, r)
    for item in reversed(refl):
        if item is None:
            continue
        j, v, beta = item
        E[j:, :] -= np.outer(beta * v, v @ E[j:, :])
    Q2 = E  # n x r with orthonormal columns, R[:r,:].T = Q2 @ T2[:r,:r]

    # R[:r, :] = T2[:r,:r].T @ Q2.T; solve T2.T y = c then X' = Q2 y
    c = C[:r]
    y = _forward_substitute_lower(T2[:r, :r].T, c)
    Xp = Q2 @ y
    X = np.empty_like(Xp)
    X[perm] = Xp
    deficient = sorted(perm[r:].tolist())
    return (X[:, 0] if squeeze else X), r, deficient


@njit(cache=True)
def _jacobi_kernel(A, Vt, tol2, max_sweeps):
    n = A.shape[0]
    sweeps = 0
    off = 0.0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += A[p, q] * A[p, q]
        if off <= tol2:
            return sweeps - 1, off
        # skip tiny rotations early on; final sweeps annihilate everything
        thresh = 0.2 * off / (n * n) if sweep < 4 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq * apq <= thresh:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # symmetric two-sided rotation; rows read contiguously
                for k in range(n):
                    akp = A[p, k]
                    akq = A[q, k]
                    newp = c * akp - s * akq
                    newq = s * akp + c * akq
                    A[p, k] = newp
                    A[q, k] = newq
                    A[k, p] = newp
                    A[k, q] = newq
                A[p, p] = c * c * app - 2.0 * s * c * apq + s * s * aqq
                A[q, q] = s * s * app + 2.0 * s * c * apq + c * c * aqq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = Vt[p, k]
                    vkq = Vt[q, k]
                    Vt[p, k] = c * vkp - s * vkq
                    Vt[q, k] = s * vkp + c * vkq
    return -1, off


def jacobi_eigh(G, max_sweeps=30):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues desc, eigenvectors as columns in matching order).
    Raises ConvergenceError if the off-diagonal mass fails to vanish.
    """
    G = np.asarray(G, dtype=np.float64)
    if G.shape[0] != G.shape[1]:
        raise ValueError("matrix must be square")
    n = G.shape[0]
    if n == 1:
        return G.diagonal().copy(), np.ones((1, 1))
    A = np.array(G, dtype=np.float64, order="C", copy=True)
    Vt = np.eye(n)
    fro = np.sqrt((A * A).sum())
    tol2 = (1e-14 * fro) ** 2 if fro > 0 else 1.0
    sweeps, off = _jacobi_kernel(A, Vt, tol2, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(
            f"Jacobi eigen iteration: off-diagonal mass {off:.3e} after "
            f"{max_sweeps} sweeps (target {tol2:.3e})"
        )
    w = A.diagonal().copy()
    order = np.argsort(w)[::-1]
    return w[order], Vt[order].T.copy()


@njit(cache=True)
def _onesided_kernel(Wt, sq, tol, max_sweeps):
    nc, m = Wt.shape
    for sweep in range(max_sweeps):
        rotations = 0
        # inner products below the roundoff floor of the dominant column
        # cannot be resolved and must not keep the sweep alive
        floor = 1e-15 * sq.max()
        for p in range(nc - 1):
            for q in range(p + 1, nc):
                a = sq[p]
                b = sq[q]
                if a == 0.0 or b == 0.0:
                    continue
                g = 0.0
                for i in range(m):
                    g += Wt[p, i] * Wt[q, i]
                if g * g <= tol * tol * a * b or abs(g) <= floor:
                    continue
                tau = (b - a) / (2.0 * g)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(m):
                    wp = Wt[p, i]
                    wq = Wt[q, i]
                    Wt[p, i] = c * wp - s * wq
                    Wt[q, i] = s * wp + c * wq
                sq[p] = c * c * a - 2.0 * c * s * g + s * s * b
                sq[q] = s * s * a + 2.0 * c * s * g + c * c * b
                rotations += 1
        if rotations == 0:
            return sweep
    return -1


def onesided_jacobi(W, tol=1e-13, max_sweeps=40):
    """Orthogonalize the columns of W by cyclic plane rotations.

    Returns (Q, sigma): W's column space rotated so that Q's columns are
    mutually orthogonal with norms sigma, sorted nonincreasing. Equivalent to
    diagonalizing the Gram matrix W^T W by cyclic Jacobi; the rotation angles
    are identical, the Gram is just never formed. Convergence: a full sweep
    in which every pair satisfies |w_p.w_q| <= tol ||w_p|| ||w_q||.
    """
    # always a private copy: ascontiguousarray(W.T) aliases the caller's
    # buffer whenever W.T is already C-contiguous, and the kernel mutates it
    Wt = np.array(np.asarray(W, dtype=np.float64).T, order="C", copy=True)
    sq = (Wt * Wt).sum(axis=1)
    swept = _onesided_kernel(Wt, sq, tol, max_sweeps)
    if swept < 0:
        raise ConvergenceError(
            f"one-sided Jacobi: rotations still active after {max_sweeps} sweeps"
        )
    sigma = np.sqrt(np.maximum((Wt * Wt).sum(axis=1), 0.0))
    order = np.argsort(sigma)[::-1]
    return Wt[order].T.copy(), sigma[order]


def mgs_orthonormalize(Q):
    """One modified Gram-Schmidt pass over the columns, in place."""
    Q = np.asarray(Q, dtype=np.float64)
    for j in range(Q.shape[1]):
        for i in range(j):
            Q[:, j] -= (Q[:, i] @ Q[:, j]) * Q[:, i]
        nrm = np.sqrt(Q[:, j] @ Q[:, j])
        if nrm > 0:
            Q[:, j] /= nrm
    return Q
