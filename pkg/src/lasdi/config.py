"""Declarative run configuration.

A run is described by one JSON object:

    {
      "name": "burgers1d-4pt",
      "problem": {"kind": "burgers1d", "nodes": 1001, "dt": 0.001,
                  "n_steps": 1000},
      "training": {"grid": [{"start": 0.7, "stop": 0.9, "step": 0.2},
                            {"values": [0.9, 1.1]}]},
      "testing":  {"grid": [{"start": 0.7, "stop": 0.9, "step": 0.01},
                            {"start": 0.9, "stop": 1.1, "step": 0.01}]},
      "compression": {"kind": "pod", "latent_dim": 5},
      "library": {"poly_degree": 1, "cross_terms": true, "sin": false,
                  "cos": false, "exp": false, "constant": true},
      "dynamics": {"strategy": "global", "n_di": null, "method": "rbf",
                   "rescale": false},
      "solver": {"rtol": 1e-6, "atol": 1e-8},
      "solve_test_references": false,
      "output_dir": null
    }

problem.kind and compression are required; everything else has defaults.
Parameter sets are either explicit {"points": [[...], ...]} or tensor-product
{"grid": [axis, ...]} with one axis spec per problem parameter. An axis is
{"values": [...]} or an inclusive range {"start", "stop", "step"}; range
values are generated as start + i*step in exact decimal arithmetic (never
accumulated floats) and stop must land exactly on the grid. grid axes sweep
like nested loops, first axis outermost.

compression kind "autoencoder" accepts hidden_width, activation, seed,
epochs, learning_rate, batch_size alongside latent_dim; they mirror the
training config defaults.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field, fields
from decimal import Decimal, InvalidOperation

from .autoencoder import AeConfig
from .dopri import OdeSolverConfig
from .errors import ConfigError, IoError
from .library import LibrarySpec
from .problems import PROBLEM_KINDS, PdeProblem, make_problem


@dataclass
class ProblemConfig:
    kind: str
    nodes: int | tuple | None = None
    dt: float | None = None
    n_steps: int | None = None

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ConfigError(
                f"unknown problem kind {self.kind!r}; choose from {PROBLEM_KINDS}")
        if isinstance(self.nodes, list):
            self.nodes = tuple(self.nodes)


@dataclass
class CompressionConfig:
    kind: str
    latent_dim: int
    hidden_width: int | None = None
    activation: str = "sigmoid"
    seed: int = 0
    epochs: int = 10000
    learning_rate: float = 1.0e-3
    batch_size: int | None = None

    def __post_init__(self):
        if self.kind not in ("pod", "autoencoder"):
            raise ConfigError(f"compression kind must be pod or autoencoder, "
                              f"got {self.kind!r}")
        if int(self.latent_dim) < 1:
            raise ConfigError(f"latent_dim must be >= 1, got {self.latent_dim}")
        self.latent_dim = int(self.latent_dim)

    def ae_config(self) -> AeConfig:
        return AeConfig(hidden_width=self.hidden_width,
                        activation=self.activation, seed=self.seed,
                        epochs=self.epochs, learning_rate=self.learning_rate,
                        batch_size=self.batch_size)


@dataclass
class DynamicsConfig:
    strategy: str = "global"
    n_di: int | None = None
    method: str = "rbf"
    rescale: bool = False
    refine: bool = False    # trajectory refinement, global strategy only


@dataclass
class RunConfig:
    problem: ProblemConfig
    compression: CompressionConfig
    training: tuple = ()
    testing: tuple = ()
    library: LibrarySpec = None
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    solver: OdeSolverConfig = field(default_factory=OdeSolverConfig)
    solve_test_references: bool = False
    output_dir: str | None = None
    name: str = "run"

    def __post_init__(self):
        if self.library is None:
            self.library = LibrarySpec(latent_dim=self.compression.latent_dim)
        if self.library.latent_dim != self.compression.latent_dim:
            raise ConfigError(
                f"library latent_dim {self.library.latent_dim} != compression "
                f"latent_dim {self.compression.latent_dim}")
        n_par = _N_PARAMS[self.problem.kind]
        for p in itertools.chain(self.training, self.testing):
            if len(p) != n_par:
                raise ConfigError(
                    f"{self.problem.kind} takes {n_par} parameters, "
                    f"got point {tuple(p)}")
        if not self.training:
            raise ConfigError("training set is empty")

    def build_problem(self) -> PdeProblem:
        return make_problem(self.problem.kind, nodes=self.problem.nodes,
                            dt=self.problem.dt, n_steps=self.problem.n_steps)


_N_PARAMS = {"burgers1d": 2, "burgers2d": 2, "heat2d": 2, "advect2d": 1}


def _decimal(x, what):
    try:
        return Decimal(str(x))
    except InvalidOperation:
        raise ConfigError(f"{what} is not a number: {x!r}") from None


def expand_axis(spec) -> list[float]:
    """One axis of a parameter grid -> inclusive list of values."""
    if not isinstance(spec, dict):
        raise ConfigError(f"axis spec must be an object, got {spec!r}")
    if "values" in spec:
        vals = spec["values"]
        if not vals:
            raise ConfigError("axis values list is empty")
        return [float(v) for v in vals]
    missing = {"start", "stop", "step"} - spec.keys()
    if missing:
        raise ConfigError(f"axis range needs start/stop/step, missing {sorted(missing)}")
    start = _decimal(spec["start"], "start")
    stop = _decimal(spec["stop"], "stop")
    step = _decimal(spec["step"], "step")
    if step <= 0:
        raise ConfigError(f"axis step must be positive, got {step}")
    if stop < start:
        raise ConfigError(f"axis range has start {start} > stop {stop}")
    n, rem = divmod(stop - start, step)
    if rem != 0:
        raise ConfigError(
            f"range [{start}, {stop}] is not a whole number of steps {step}")
    return [float(start + i * step) for i in range(int(n) + 1)]


def expand_set(spec, n_params: int) -> tuple:
    """Parameter set spec -> tuple of parameter tuples."""
    if spec is None:
        return ()
    if not isinstance(spec, dict):
        raise ConfigError(f"parameter set must be an object, got {spec!r}")
    if "points" in spec and "grid" in spec:
        raise ConfigError('parameter set has both "points" and "grid"; '
                          'keep one')
    if "points" in spec:
        return tuple(tuple(float(v) for v in p) for p in spec["points"])
    if "grid" in spec:
        axes = spec["grid"]
        if len(axes) != n_params:
            raise ConfigError(
                f"grid has {len(axes)} axes but the problem takes {n_params} "
                f"parameters")
        return tuple(itertools.product(*(expand_axis(a) for a in axes)))
    raise ConfigError('parameter set needs a "points" or "grid" key')


def _take(d: dict, allowed, where: str) -> dict:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown {where} keys {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")
    return d


_LIB_KEYS = {"poly_degree": "poly_degree", "cross_terms": "include_cross_terms",
             "sin": "include_sin", "cos": "include_cos", "exp": "include_exp",
             "constant": "include_constant"}


def parse_config(d: dict) -> RunConfig:
    """Validated RunConfig from a JSON-shaped dict; ranges expanded here."""
    if not isinstance(d, dict):
        raise ConfigError("config root must be a JSON object")
    _take(d, {"name", "problem", "training", "testing", "compression",
              "library", "dynamics", "solver", "solve_test_references",
              "output_dir"}, "config")
    for key in ("problem", "compression"):
        if key not in d:
            raise ConfigError(f"config is missing the {key!r} section")
    prob = ProblemConfig(**_take(dict(d["problem"]),
                                 ("kind", "nodes", "dt", "n_steps"), "problem"))
    comp = CompressionConfig(**_take(
        dict(d["compression"]),
        ("kind", "latent_dim", "hidden_width", "activation", "seed",
         "epochs", "learning_rate", "batch_size"), "compression"))
    lib_json = _take(dict(d.get("library", {})), _LIB_KEYS, "library")
    lib = LibrarySpec(latent_dim=comp.latent_dim,
                      **{_LIB_KEYS[k]: v for k, v in lib_json.items()})
    dyn = DynamicsConfig(**_take(dict(d.get("dynamics", {})),
                                 ("strategy", "n_di", "method", "rescale",
                                  "refine"),
                                 "dynamics"))
    solver_keys = tuple(f.name for f in fields(OdeSolverConfig))
    sol = OdeSolverConfig(**_take(dict(d.get("solver", {})), solver_keys,
                                  "solver"))
    n_par = _N_PARAMS[prob.kind]
    return RunConfig(
        problem=prob,
        compression=comp,
        training=expand_set(d.get("training"), n_par),
        testing=expand_set(d.get("testing"), n_par),
        library=lib,
        dynamics=dyn,
        solver=sol,
        solve_test_references=bool(d.get("solve_test_references", False)),
        output_dir=d.get("output_dir"),
        name=str(d.get("name", "run")),
    )


def to_dict(cfg: RunConfig) -> dict:
    """Canonical JSON form; parse_config(to_dict(cfg)) == cfg."""
    lib = {k: getattr(cfg.library, attr) for k, attr in _LIB_KEYS.items()}
    return {
        "name": cfg.name,
        "problem": {k: v for k, v in asdict(cfg.problem).items() if v is not None},
        "training": {"points": [list(p) for p in cfg.training]},
        "testing": {"points": [list(p) for p in cfg.testing]},
        "compression": asdict(cfg.compression),
        "library": lib,
        "dynamics": asdict(cfg.dynamics),
        "solver": asdict(cfg.solver),
        "solve_test_references": cfg.solve_test_references,
        "output_dir": cfg.output_dir,
    }


def load_config(path) -> RunConfig:
    return parse_config(_read_json(path))


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as f:
        json.dump(to_dict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")


def _read_json(path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def merge_dicts(base: dict, overlay: dict) -> dict:
    """Recursive overlay for preset + user-config composition.

    Objects merge key by key; any other value (including lists, so a new
    grid replaces the preset's grid wholesale) overwrites. A parameter-set
    object (one with a "points" or "grid" key) also replaces wholesale:
    unioning a user's points into a preset's grid would leave both keys and
    an ambiguous sweep.
    """
    out = dict(base)
    for k, v in overlay.items():
        if (isinstance(v, dict) and isinstance(out.get(k), dict)
                and not ({"points", "grid"} & v.keys())):
            out[k] = merge_dicts(out[k], v)
        else:
            out[k] = v
    return out
