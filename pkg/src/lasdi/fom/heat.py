"""Nonlinear heat conduction u_t = div((1+u) grad u) with zero-flux boundaries.

Backward Euler with the conductivity (1+u) frozen at the previous time step,
so each step is one linear banded solve. The Laplacian is in flux form with
arithmetic-mean face coefficients k_face = 1 + (u_p + u_q)/2; boundary faces
are simply absent, which enforces the Neumann condition and conserves the
discrete integral of u exactly.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from ..problems import ParameterPoint, PdeProblem


def initial_condition(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    omega, a = param.values
    x = problem.grid.coords(0)
    y = problem.grid.coords(1)
    u = a * np.sin(omega * (x[:, None] + y[None, :])) + a
    return u.ravel()


def solve(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    return march(problem, initial_condition(problem, param))


def march(problem: PdeProblem, u0: np.ndarray) -> np.ndarray:
    nx, ny = problem.grid.nodes
    dx, dy = problem.grid.spacing
    dt = problem.timegrid.dt
    nt = problem.timegrid.n_steps
    nq = nx * ny
    cx, cy = dt / dx**2, dt / dy**2

    states = np.empty((nq, nt + 1))
    states[:, 0] = u0

    ab = np.zeros((2 * ny + 1, nq))
    for step in range(1, nt + 1):
        U = states[:, step - 1].reshape(nx, ny)
        ka = 1.0 + 0.5 * (U[:-1, :] + U[1:, :])   # faces along axis 0
        kb = 1.0 + 0.5 * (U[:, :-1] + U[:, 1:])   # faces along axis 1

        diag = np.ones((nx, ny))
        diag[:-1, :] += cx * ka
        diag[1:, :] += cx * ka
        diag[:, :-1] += cy * kb
        diag[:, 1:] += cy * kb

        ab[:] = 0.0
        ab[ny, :] = diag.ravel()
        off = np.zeros((nx, ny))
        off[1:, :] = -cx * ka
        ab[0, :] = off.ravel()        # A[q-ny, q]
        off[:] = 0.0
        off[:-1, :] = -cx * ka
        ab[2 * ny, :] = off.ravel()   # A[q+ny, q]
        off[:] = 0.0
        off[:, 1:] = -cy * kb
        ab[ny - 1, :] = off.ravel()   # A[q-1, q]
        off[:] = 0.0
        off[:, :-1] = -cy * kb
        ab[ny + 1, :] = off.ravel()   # A[q+1, q]

        states[:, step] = solve_banded((ny, ny), ab, states[:, step - 1])
    return states
