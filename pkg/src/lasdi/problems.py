"""Problem definitions: grids, time discretizations, parameter domains.

Four built-in problems, all on uniform grids:

  burgers1d   u_t = -u u_x                     x in [-3,3],   u=0 at ends
  burgers2d   u_t = -u.grad(u) + nu Lap(u)     [-3,3]^2,      u=0 on boundary
  heat2d      u_t = div((1+u) grad u)          [0,1]^2,       zero-flux boundary
  advect2d    u_t = -v.grad(u)                 [-1,1]^2,      u=0 on boundary

State layout: scalar problems store nodes row-major over (axis0, axis1).
burgers2d stores the u-component block followed by the v-component block,
each row-major. This layout is fixed; the decoder mask depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ShapeError


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform tensor grid. axes[k] = (lo, hi, nodes)."""

    axes: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        for lo, hi, n in self.axes:
            if not (hi > lo and n >= 2):
                raise ConfigError(f"bad grid axis (lo={lo}, hi={hi}, nodes={n})")

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(n for _, _, n in self.axes)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for lo, hi, n in self.axes)

    @property
    def n_nodes(self) -> int:
        out = 1
        for n in self.nodes:
            out *= n
        return out

    def coords(self, axis: int) -> np.ndarray:
        lo, hi, n = self.axes[axis]
        return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    n_steps: int

    def __post_init__(self):
        if self.dt <= 0 or self.n_steps < 1:
            raise ConfigError(f"bad time grid (dt={self.dt}, n_steps={self.n_steps})")

    @property
    def t_final(self) -> float:
        return self.n_steps * self.dt

    def instants(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class ParameterPoint:
    values: tuple[float, ...]

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(float(v) for v in values))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)


@dataclass(frozen=True)
class PdeProblem:
    kind: str
    grid: SpatialGrid
    timegrid: TimeGrid
    param_names: tuple[str, ...]
    param_bounds: tuple[tuple[float, float], ...]
    n_components: int = 1
    extra: dict = field(default_factory=dict)  # e.g. viscosity for burgers2d

    @property
    def state_dim(self) -> int:
        return self.n_components * self.grid.n_nodes

    def validate_param(self, param: ParameterPoint, bounds: bool = True) -> None:
        if len(param) != len(self.param_names):
            raise ShapeError(
                f"{self.kind} takes {len(self.param_names)} parameters "
                f"{self.param_names}, got {len(param)}"
            )
        if not bounds:
            return
        for name, v, (lo, hi) in zip(self.param_names, param, self.param_bounds):
            if not (lo <= v <= hi):
                raise DomainError(
                    f"{self.kind}: parameter {name}={v} outside domain [{lo}, {hi}]"
                )


@dataclass
class StateTrajectory:
    """Columns are states at t^0 .. t^{N_t}; column 0 is the initial condition."""

    states: np.ndarray  # (state_dim, N_t + 1)
    param: ParameterPoint

    def __post_init__(self):
        self.states = np.ascontiguousarray(self.states, dtype=np.float64)
        if self.states.ndim != 2:
            raise ShapeError("trajectory states must be a 2-D array")


_DEFAULTS = {
    "burgers1d": dict(
        axes=((-3.0, 3.0, 1001),),
        dt=1.0e-3,
        n_steps=1000,
        param_names=("a", "w"),
        param_bounds=((0.7, 0.9), (0.9, 1.1)),
        n_components=1,
    ),
    "burgers2d": dict(
        axes=((-3.0, 3.0, 61), (-3.0, 3.0, 61)),
        dt=2.0 / 1500.0,
        n_steps=1500,
        param_names=("a", "w"),
        param_bounds=((0.7, 0.9), (0.9, 1.1)),
        n_components=2,
        extra={"viscosity": 1.0 / 10000.0},
    ),
    "heat2d": dict(
        axes=((0.0, 1.0, 65), (0.0, 1.0, 65)),
        dt=0.01,
        n_steps=100,
        param_names=("omega", "a"),
        param_bounds=((0.2, 5.0), (1.8, 2.2)),
        n_components=1,
    ),
    "advect2d": dict(
        axes=((-1.0, 1.0, 64), (-1.0, 1.0, 64)),
        dt=0.0025,
        n_steps=1200,
        param_names=("omega",),
        param_bounds=((0.6, 1.4),),
        n_components=1,
    ),
}

PROBLEM_KINDS = tuple(_DEFAULTS)


def make_problem(kind: str, *, nodes=None, dt=None, n_steps=None) -> PdeProblem:
    """Build a problem with Table-1 defaults, optionally overriding resolution.

    nodes: int or per-axis tuple; dt/n_steps: time discretization overrides.
    Parameter domains are fixed per problem kind.
    """
    if kind not in _DEFAULTS:
        raise ConfigError(f"unknown problem kind {kind!r}; choose from {PROBLEM_KINDS}")
    d = _DEFAULTS[kind]
    axes = d["axes"]
    if nodes is not None:
        if isinstance(nodes, int):
            nodes = (nodes,) * len(axes)
        if len(nodes) != len(axes):
            raise ConfigError(f"{kind} has {len(axes)} axes, got nodes={nodes}")
        axes = tuple((lo, hi, int(n)) for (lo, hi, _), n in zip(axes, nodes))
    return PdeProblem(
        kind=kind,
        grid=SpatialGrid(axes),
        timegrid=TimeGrid(dt=float(dt if dt is not None else d["dt"]),
                          n_steps=int(n_steps if n_steps is not None else d["n_steps"])),
        param_names=d["param_names"],
        param_bounds=d["param_bounds"],
        n_components=d["n_components"],
        extra=dict(d.get("extra", {})),
    )
