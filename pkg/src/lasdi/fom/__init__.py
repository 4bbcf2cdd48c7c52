"""Full order models: finite-difference solvers for the built-in problems."""

from __future__ import annotations

import time

import numpy as np

from ..errors import ConfigError, InstabilityError
from ..problems import ParameterPoint, PdeProblem, StateTrajectory
from . import advection, burgers, heat

_IC = {
    "burgers1d": burgers.initial_condition_1d,
    "burgers2d": burgers.initial_condition_2d,
    "heat2d": heat.initial_condition,
    "advect2d": advection.initial_condition,
}

_SOLVE = {
    "burgers1d": burgers.solve_1d,
    "burgers2d": burgers.solve_2d,
    "heat2d": heat.solve,
    "advect2d": advection.solve,
}


def initial_condition(problem: PdeProblem, param: ParameterPoint,
                      check_domain: bool = True) -> np.ndarray:
    """Evaluate u^0 nodewise; Dirichlet boundary nodes overwritten to 0.

    check_domain=False skips the parameter-bounds check so callers can
    deliberately extrapolate outside the declared domain.
    """
    problem.validate_param(param, bounds=check_domain)
    return _IC[problem.kind](problem, param)


def solve_fom(problem: PdeProblem, param: ParameterPoint) -> StateTrajectory:
    """March the full order model over the problem's time grid.

    Returns a trajectory whose column 0 is the initial condition and whose
    remaining N_t columns are the time-stepped states.
    """
    if problem.kind not in _SOLVE:
        raise ConfigError(f"no solver for problem kind {problem.kind!r}")
    problem.validate_param(param)
    states = _SOLVE[problem.kind](problem, param)
    if not np.isfinite(states).all():
        raise InstabilityError(f"{problem.kind} produced non-finite states")
    return StateTrajectory(states=states, param=param)


def measure_fom_walltime(problem: PdeProblem, param: ParameterPoint) -> float:
    """Wallclock seconds for one complete solve_fom call (no I/O involved)."""
    t0 = time.perf_counter()
    solve_fom(problem, param)
    return time.perf_counter() - t0
