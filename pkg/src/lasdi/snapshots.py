"""Snapshot matrices: assembly, block slicing, persistence, ingestion.

A snapshot matrix stacks one trajectory per training parameter side by side:
column block k (1-based) spans columns (k-1)(N_t+1) .. k(N_t+1)-1 and holds
the trajectory of training_params[k-1]. Latent snapshot matrices share the
same block structure with n_s rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .errors import ConfigError, IngestError, ShapeError
from .problems import ParameterPoint, StateTrajectory

MAGIC_SNAP = b"LASNAP\x00\x00"


@dataclass
class SnapshotMatrix:
    data: np.ndarray                      # (N_s, (N_t+1) * n_mu)
    params: list[ParameterPoint]
    n_time: int                           # N_t
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        width = self.n_time + 1
        if self.data.ndim != 2 or self.data.shape[1] != width * len(self.params):
            raise ShapeError(
                f"snapshot data {self.data.shape} inconsistent with "
                f"{len(self.params)} blocks of width {width}"
            )

    @property
    def n_space(self) -> int:
        return self.data.shape[0]

    @property
    def n_params(self) -> int:
        return len(self.params)

    @property
    def block_width(self) -> int:
        return self.n_time + 1

    def blocks(self):
        """Yield (param, block) views in training order."""
        w = self.block_width
        for k, p in enumerate(self.params):
            yield p, self.data[:, k * w : (k + 1) * w]


def assemble(trajectories: list[StateTrajectory]) -> SnapshotMatrix:
    """Concatenate trajectories column-wise in input order."""
    if not trajectories:
        raise ShapeError("cannot assemble an empty trajectory list")
    n_s = trajectories[0].states.shape[0]
    n_cols = trajectories[0].states.shape[1]
    seen = set()
    for t in trajectories:
        if t.states.shape != (n_s, n_cols):
            raise ShapeError(
                f"trajectory shape {t.states.shape} != expected {(n_s, n_cols)}"
            )
        if t.param.values in seen:
            raise ConfigError(f"duplicate training parameter {t.param.values}")
        seen.add(t.param.values)
    data = np.concatenate([t.states for t in trajectories], axis=1)
    return SnapshotMatrix(
        data=data, params=[t.param for t in trajectories], n_time=n_cols - 1
    )


def slice_block(matrix: SnapshotMatrix, k: int) -> np.ndarray:
    """Block for training index k (1-based, matching the column-range rule)."""
    if not 1 <= k <= matrix.n_params:
        raise IndexError(f"training index {k} outside 1..{matrix.n_params}")
    w = matrix.block_width
    return matrix.data[:, (k - 1) * w : k * w]


def save(matrix: SnapshotMatrix, path) -> None:
    p_dim = len(matrix.params[0]) if matrix.params else 0
    write_container(
        path,
        MAGIC_SNAP,
        dims=[matrix.n_space, matrix.n_time, matrix.n_params, p_dim],
        params=np.array([p.values for p in matrix.params], dtype=np.float64),
        meta=dict(matrix.meta),
        arrays=[("data", matrix.data)],
    )


def load(path) -> SnapshotMatrix:
    dims, params, meta, arrays, _ = read_container(path, MAGIC_SNAP)
    n_space, n_time, n_mu, p_dim = dims
    data = arrays["data"]
    if data.shape != (n_space, (n_time + 1) * n_mu):
        raise ShapeError(f"{path}: payload shape {data.shape} inconsistent with header")
    pts = [
        ParameterPoint(params[i * p_dim : (i + 1) * p_dim]) for i in range(n_mu)
    ]
    meta = {k: v for k, v in meta.items() if k not in ("arrays", "raw")}
    return SnapshotMatrix(data=data, params=pts, n_time=int(n_time), meta=meta)


def to_csv(matrix: SnapshotMatrix, path, dt: float | None = None) -> None:
    """One spatial DOF per row; header labels each column with its t^n."""
    dt = dt if dt is not None else matrix.meta.get("dt", 1.0)
    labels = []
    for _ in matrix.params:
        labels.extend(f"t{n * dt:.17g}" for n in range(matrix.block_width))
    with open(path, "w") as f:
        f.write(",".join(labels) + "\n")
        np.savetxt(f, matrix.data, fmt="%.17g", delimiter=",")


def from_csv(path, params: list[ParameterPoint], n_time: int) -> SnapshotMatrix:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SnapshotMatrix(data=data, params=list(params), n_time=n_time)


def _parse_descriptor(path) -> dict:
    out = {}
    with open(path) as f:
        for ln, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise IngestError(f"{path}:{ln}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    for key in ("n_space", "n_time", "n_param", "params"):
        if key not in out:
            raise IngestError(f"{path}: missing descriptor key {key!r}")
    return out


def ingest_external(data_path, descriptor_path) -> SnapshotMatrix:
    """Load foreign trajectories (CSV or raw column-major f64) + descriptor.

    Descriptor: key = value lines with n_space, n_time, n_param, and params
    (semicolon-separated points, comma-separated values within a point).
    """
    d = _parse_descriptor(descriptor_path)
    n_space, n_time, n_mu = int(d["n_space"]), int(d["n_time"]), int(d["n_param"])
    pts = []
    for chunk in d["params"].split(";"):
        chunk = chunk.strip()
        if chunk:
            pts.append(ParameterPoint([float(v) for v in chunk.split(",")]))
    if len(pts) != n_mu:
        raise IngestError(
            f"{descriptor_path}: n_param={n_mu} but {len(pts)} parameter points listed"
        )
    n_cols = (n_time + 1) * n_mu
    text = str(data_path).lower().endswith(".csv")
    if text:
        try:
            data = np.loadtxt(data_path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as e:
            raise IngestError(f"{data_path}: {e}") from None
    else:
        buf = np.fromfile(data_path, dtype="<f8")
        if buf.size != n_space * n_cols:
            raise IngestError(
                f"{data_path}: {buf.size} values, expected {n_space}x{n_cols}"
            )
        data = buf.reshape((n_space, n_cols), order="F")
    if data.shape != (n_space, n_cols):
        raise IngestError(
            f"{data_path}: shape {data.shape}, descriptor implies {(n_space, n_cols)}"
        )
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        r, c = bad[0]
        raise IngestError(f"{data_path}: non-finite entry at row {r}, column {c}")
    return SnapshotMatrix(data=data, params=pts, n_time=n_time)
