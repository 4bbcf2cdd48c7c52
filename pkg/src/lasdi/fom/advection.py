"""Radial advection u_t = -v.grad(u) with a fixed rotational velocity field.

v = (pi/2) d(x) [x1, -x0],  d = ((1 - x0^2)(1 - x1^2))^2, which vanishes on
the boundary of [-1,1]^2. Classical RK4 in time; first-order upwind space
differences with the upwind side picked per node by the sign of each
velocity component. Dirichlet u = 0 on the boundary.
"""

from __future__ import annotations

import numpy as np

from ..problems import ParameterPoint, PdeProblem


def initial_condition(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    (omega,) = param.values
    x = problem.grid.coords(0)
    y = problem.grid.coords(1)
    u = np.sin(np.pi * omega * x)[:, None] * np.sin(np.pi * omega * y)[None, :]
    u[0, :] = u[-1, :] = 0.0
    u[:, 0] = u[:, -1] = 0.0
    return u.ravel()


def velocity(problem: PdeProblem) -> tuple[np.ndarray, np.ndarray]:
    x = problem.grid.coords(0)[:, None]
    y = problem.grid.coords(1)[None, :]
    d = ((1.0 - x**2) * (1.0 - y**2)) ** 2
    vx = 0.5 * np.pi * d * y
    vy = -0.5 * np.pi * d * x
    return np.broadcast_to(vx, (x.size, y.shape[1])).copy(), \
        np.broadcast_to(vy, (x.size, y.shape[1])).copy()


def solve(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    return march(problem, initial_condition(problem, param))


def march(problem: PdeProblem, u0: np.ndarray) -> np.ndarray:
    nx, ny = problem.grid.nodes
    dx, dy = problem.grid.spacing
    dt = problem.timegrid.dt
    nt = problem.timegrid.n_steps

    vx, vy = velocity(problem)  # evaluated once, reused by every RK stage
    vx_pos = vx > 0
    vy_pos = vy > 0

    def rhs(u):
        ux = np.empty_like(u)
        np.subtract(u, np.roll(u, 1, axis=0), out=ux)   # backward difference
        fwd = np.roll(u, -1, axis=0) - u
        np.copyto(ux, fwd, where=~vx_pos)
        ux /= dx
        uy = np.empty_like(u)
        np.subtract(u, np.roll(u, 1, axis=1), out=uy)
        fwd = np.roll(u, -1, axis=1) - u
        np.copyto(uy, fwd, where=~vy_pos)
        uy /= dy
        out = -(vx * ux + vy * uy)
        out[0, :] = out[-1, :] = 0.0   # boundary pinned at zero
        out[:, 0] = out[:, -1] = 0.0
        return out

    states = np.empty((nx * ny, nt + 1))
    states[:, 0] = u0
    u = states[:, 0].reshape(nx, ny).copy()
    for step in range(1, nt + 1):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[:, step] = u.ravel()
    return states
