"""Implicit backward-Euler solvers for the 1D and 2D Burgers equations.

Spatial schemes: backward differences for the advection terms, central
differences for the 2D diffusion term. Each implicit step solves the
nonlinear residual with Newton iteration and an exact banded Jacobian.

1D:  u_t = -u u_x                 on [-3, 3],   u(+-3) = 0
2D:  u_t = -u.grad(u) + nu Lap u  on [-3, 3]^2, u = 0 on the boundary

The 2D state vector is the u-component block followed by the v-component
block, each row-major over (x-axis index, y-axis index). Internally the
Newton solve permutes interior unknowns to an interleaved (u_ij, v_ij)
ordering so the Jacobian is banded; the state layout is unchanged.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from ..errors import NewtonDivergenceError
from ..problems import ParameterPoint, PdeProblem

NEWTON_TOL = 1e-10
NEWTON_MAXIT = 20


def initial_condition_1d(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    a, w = param.values
    x = problem.grid.coords(0)
    u = a * np.exp(-(x**2) / w)
    u[0] = 0.0
    u[-1] = 0.0
    return u


def solve_1d(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    return march_1d(problem, initial_condition_1d(problem, param))


def march_1d(problem: PdeProblem, u0: np.ndarray) -> np.ndarray:
    n = problem.grid.nodes[0]
    dx = problem.grid.spacing[0]
    dt = problem.timegrid.dt
    nt = problem.timegrid.n_steps

    states = np.empty((n, nt + 1))
    states[:, 0] = u0

    r = dt / dx
    up = states[:, 0].copy()
    # interior unknowns u[1..n-2]; ends pinned at 0
    ab = np.zeros((2, n - 2))
    for step in range(1, nt + 1):
        uk = up.copy()
        for it in range(NEWTON_MAXIT + 1):
            ui = uk[1:-1]
            um = uk[:-2]  # left neighbor, includes the fixed u[0]=0
            F = ui - up[1:-1] + r * ui * (ui - um)
            res = np.abs(F).max()
            if res <= NEWTON_TOL:
                break
            if it == NEWTON_MAXIT or not np.isfinite(res):
                raise NewtonDivergenceError(step, res, NEWTON_TOL)
            ab[0, :] = 1.0 + r * (2.0 * ui - um)  # diagonal
            ab[1, :-1] = -r * ui[1:]              # subdiagonal J[i, i-1]
            duk = solve_banded((1, 0), ab, -F)
            uk[1:-1] += duk
        up = uk
        states[:, step] = uk
    return states


def initial_condition_2d(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    a, w = param.values
    x = problem.grid.coords(0)
    y = problem.grid.coords(1)
    r2 = x[:, None] ** 2 + y[None, :] ** 2
    u = a * np.exp(-r2 / w)
    u[0, :] = u[-1, :] = 0.0
    u[:, 0] = u[:, -1] = 0.0
    return np.concatenate([u.ravel(), u.ravel()])


def _banded_index_2d(mx: int, my: int):
    """Precompute scatter indices for the interleaved interior Jacobian.

    Interior unknown ordering: k = 2*(ii*my + jj) + c, c=0 for u, c=1 for v.
    Band halfwidth 2*my (the x-neighbor offset).
    """
    nun = 2 * mx * my
    bw = 2 * my
    ii, jj = np.meshgrid(np.arange(mx), np.arange(my), indexing="ij")
    base = 2 * (ii * my + jj).ravel()
    offsets = {
        "diag_u": (base, base),
        "diag_v": (base + 1, base + 1),
        "u_v": (base, base + 1),
        "v_u": (base + 1, base),
    }
    inner = (ii > 0).ravel()
    offsets["u_xm"] = (base[inner], base[inner] - 2 * my)
    offsets["v_xm"] = (base[inner] + 1, base[inner] + 1 - 2 * my)
    outer = (ii < mx - 1).ravel()
    offsets["u_xp"] = (base[outer], base[outer] + 2 * my)
    offsets["v_xp"] = (base[outer] + 1, base[outer] + 1 + 2 * my)
    lower = (jj > 0).ravel()
    offsets["u_ym"] = (base[lower], base[lower] - 2)
    offsets["v_ym"] = (base[lower] + 1, base[lower] - 1)
    upper = (jj < my - 1).ravel()
    offsets["u_yp"] = (base[upper], base[upper] + 2)
    offsets["v_yp"] = (base[upper] + 1, base[upper] + 3)
    masks = {"xm": inner, "xp": outer, "ym": lower, "yp": upper}
    return nun, bw, offsets, masks


def solve_2d(problem: PdeProblem, param: ParameterPoint) -> np.ndarray:
    return march_2d(problem, initial_condition_2d(problem, param))


def march_2d(problem: PdeProblem, u0: np.ndarray) -> np.ndarray:
    nx, ny = problem.grid.nodes
    dx, dy = problem.grid.spacing
    dt = problem.timegrid.dt
    nt = problem.timegrid.n_steps
    nu = problem.extra.get("viscosity", 1.0 / 10000.0)
    nn = nx * ny

    states = np.empty((2 * nn, nt + 1))
    states[:, 0] = u0

    mx, my = nx - 2, ny - 2
    nun, bw, idx, masks = _banded_index_2d(mx, my)
    ab = np.zeros((2 * bw + 1, nun))
    rhs = np.zeros(nun)

    def scatter(name, vals):
        rows, cols = idx[name]
        ab[bw + rows - cols, cols] = vals

    rx, ry = dt / dx, dt / dy
    cx, cy = dt * nu / dx**2, dt * nu / dy**2

    U = states[:nn, 0].reshape(nx, ny).copy()
    V = states[nn:, 0].reshape(nx, ny).copy()

    for step in range(1, nt + 1):
        Up, Vp = U, V
        Uk, Vk = U.copy(), V.copy()
        for it in range(NEWTON_MAXIT + 1):
            # interior views and shifted neighbors (boundaries are zero)
            u = Uk[1:-1, 1:-1]
            v = Vk[1:-1, 1:-1]
            uxm, uxp = Uk[:-2, 1:-1], Uk[2:, 1:-1]
            uym, uyp = Uk[1:-1, :-2], Uk[1:-1, 2:]
            vxm, vxp = Vk[:-2, 1:-1], Vk[2:, 1:-1]
            vym, vyp = Vk[1:-1, :-2], Vk[1:-1, 2:]

            lap_u = cx * (uxp - 2 * u + uxm) + cy * (uyp - 2 * u + uym)
            lap_v = cx * (vxp - 2 * v + vxm) + cy * (vyp - 2 * v + vym)
            Fu = u - Up[1:-1, 1:-1] + rx * u * (u - uxm) + ry * v * (u - uym) - lap_u
            Fv = v - Vp[1:-1, 1:-1] + rx * u * (v - vxm) + ry * v * (v - vym) - lap_v
            res = max(np.abs(Fu).max(), np.abs(Fv).max())
            if res <= NEWTON_TOL:
                break
            if it == NEWTON_MAXIT or not np.isfinite(res):
                raise NewtonDivergenceError(step, res, NEWTON_TOL)

            ab[:] = 0.0
            scatter("diag_u", (1.0 + rx * (2 * u - uxm) + ry * v + 2 * (cx + cy)).ravel())
            scatter("diag_v", (1.0 + rx * u + ry * (2 * v - vym) + 2 * (cx + cy)).ravel())
            scatter("u_v", (ry * (u - uym)).ravel())
            scatter("v_u", (rx * (v - vxm)).ravel())
            scatter("u_xm", (-rx * u - cx).ravel()[masks["xm"]])
            scatter("v_xm", (-rx * u - cx).ravel()[masks["xm"]])
            scatter("u_xp", np.full(masks["xp"].sum(), -cx))
            scatter("v_xp", np.full(masks["xp"].sum(), -cx))
            scatter("u_ym", (-ry * v - cy).ravel()[masks["ym"]])
            scatter("v_ym", (-ry * v - cy).ravel()[masks["ym"]])
            scatter("u_yp", np.full(masks["yp"].sum(), -cy))
            scatter("v_yp", np.full(masks["yp"].sum(), -cy))

            rhs[0::2] = -Fu.ravel()
            rhs[1::2] = -Fv.ravel()
            dk = solve_banded((bw, bw), ab, rhs)
            Uk[1:-1, 1:-1] += dk[0::2].reshape(mx, my)
            Vk[1:-1, 1:-1] += dk[1::2].reshape(mx, my)
        U, V = Uk, Vk
        states[:nn, step] = U.ravel()
        states[nn:, step] = V.ravel()
    return states
