"""Masked shallow autoencoder for nonlinear compression.

Architecture, three layers per half with linear final layers:

    encode  z = We2 act(We1 u + be1) + be2      N_s -> h -> n_s
    decode  u = (M o Wd2) act(Wd1 z + bd1) + bd2   n_s -> h -> N_s

Only the decoder's final weight matrix is masked. M is a binary N_s x h
pattern connecting each output node to the hidden units serving its
grid-stencil neighborhood (self plus adjacent nodes along each axis), so
decompression stays as local as a finite-element mass matrix. Hidden unit
assignment is deterministic: grid node k is served by unit floor(k*h/N),
which is the identity map at the default h = N.

Training is full-batch adaptive-moment descent, single threaded, and
bit-reproducible for a fixed seed. The returned network carries the
weights of the lowest-loss epoch seen, so the recorded final MSE never
exceeds the initial one.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, field

import numpy as np
from scipy.special import expit

from .container import read_container, write_container
from .errors import ConfigError, DomainError, ShapeError, TrainingError
from .problems import SpatialGrid

MAGIC_AE = b"LAAE\x00\x00\x00\x00"

# fixed parameter order; the optimizer and the .lae layout both rely on it
WEIGHT_NAMES = ("enc_w1", "enc_b1", "enc_w2", "enc_b2",
                "dec_w1", "dec_b1", "dec_w2", "dec_b2")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1.0e-8


@dataclass
class AeConfig:
    hidden_width: int | None = None  # None: one unit per state entry / mask width
    activation: str = "sigmoid"      # or "swish"
    seed: int = 0
    epochs: int = 10000
    learning_rate: float = 1.0e-3
    batch_size: int | None = None    # None: full batch


@dataclass
class TrainingRecord:
    epochs: int
    seed: int
    learning_rate: float
    initial_mse: float
    final_mse: float
    best_epoch: int


@dataclass
class Autoencoder:
    enc_w1: np.ndarray  # (h, N_s)
    enc_b1: np.ndarray  # (h,)
    enc_w2: np.ndarray  # (n_s, h)
    enc_b2: np.ndarray  # (n_s,)
    dec_w1: np.ndarray  # (h, n_s)
    dec_b1: np.ndarray  # (h,)
    dec_w2: np.ndarray  # (N_s, h); masked entries exactly zero
    dec_b2: np.ndarray  # (N_s,)
    mask: np.ndarray    # (N_s, h) binary
    activation: str = "sigmoid"
    record: TrainingRecord | None = None
    history: np.ndarray | None = None  # per-epoch MSE, entry 0 at init
    meta: dict = field(default_factory=dict)

    @property
    def n_full(self) -> int:
        return self.enc_w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.enc_w1.shape[0]

    @property
    def n_latent(self) -> int:
        return self.enc_w2.shape[0]


def _act(kind: str, x: np.ndarray):
    """Activation value and derivative at x."""
    s = expit(x)
    if kind == "sigmoid":
        return s, s * (1.0 - s)
    if kind == "swish":
        return x * s, s * (1.0 + x * (1.0 - s))
    raise ConfigError(f"unknown activation {kind!r} (sigmoid or swish)")


def build_mask(grid: SpatialGrid, hidden_width: int, n_components: int = 1) -> np.ndarray:
    """Binary decoder mask (n_components * n_nodes) x hidden_width.

    Every component block at node i connects to the hidden units assigned
    to i and its axis neighbors; the self connection guarantees row sums
    of at least one for any 1 <= hidden_width <= node count.
    """
    n = grid.n_nodes
    h = int(hidden_width)
    if not 1 <= h <= n:
        raise ShapeError(f"hidden width {h} outside 1..{n} (grid node count)")
    unit = (np.arange(n) * h) // n
    block = np.zeros((n, h))
    idx = np.arange(n).reshape(grid.nodes)
    pairs = [(np.arange(n), np.arange(n))]
    for ax in range(grid.dimension):
        lead = np.take(idx, np.arange(1, grid.nodes[ax]), axis=ax).ravel()
        lag = np.take(idx, np.arange(grid.nodes[ax] - 1), axis=ax).ravel()
        pairs += [(lead, lag), (lag, lead)]
    for rows, nbrs in pairs:
        block[rows, unit[nbrs]] = 1.0
    return np.tile(block, (int(n_components), 1))


def _as_batch(x, dim: int, what: str):
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] != dim:
        raise ShapeError(f"{what} expects leading dimension {dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"non-finite values in {what} input")
    return x, squeeze


def ae_encode(ae: Autoencoder, states) -> np.ndarray:
    x, squeeze = _as_batch(states, ae.n_full, "ae_encode")
    y, _ = _act(ae.activation, ae.enc_w1 @ x + ae.enc_b1[:, None])
    z = ae.enc_w2 @ y + ae.enc_b2[:, None]
    return z[:, 0] if squeeze else z


def ae_decode(ae: Autoencoder, latent) -> np.ndarray:
    z, squeeze = _as_batch(latent, ae.n_latent, "ae_decode")
    y, _ = _act(ae.activation, ae.dec_w1 @ z + ae.dec_b1[:, None])
    u = ae.dec_w2 @ y + ae.dec_b2[:, None]
    return u[:, 0] if squeeze else u


def loss_and_gradients(ae: Autoencoder, states: np.ndarray):
    """Reconstruction MSE over all entries and its gradients by backprop.

    Returns (mse, grads) with grads keyed like WEIGHT_NAMES. The dec_w2
    gradient is pre-masked so masked entries never accumulate moments.
    """
    S = states
    a1 = ae.enc_w1 @ S + ae.enc_b1[:, None]
    y1, d1 = _act(ae.activation, a1)
    z = ae.enc_w2 @ y1 + ae.enc_b2[:, None]
    a2 = ae.dec_w1 @ z + ae.dec_b1[:, None]
    y2, d2 = _act(ae.activation, a2)
    out = ae.dec_w2 @ y2 + ae.dec_b2[:, None]

    r = out - S
    mse = float(np.mean(r * r))

    g_out = (2.0 / r.size) * r
    g = {"dec_w2": (g_out @ y2.T) * ae.mask, "dec_b2": g_out.sum(axis=1)}
    gy2 = (ae.dec_w2.T @ g_out) * d2
    g["dec_w1"] = gy2 @ z.T
    g["dec_b1"] = gy2.sum(axis=1)
    gz = ae.dec_w1.T @ gy2
    g["enc_w2"] = gz @ y1.T
    g["enc_b2"] = gz.sum(axis=1)
    gy1 = (ae.enc_w2.T @ gz) * d1
    g["enc_w1"] = gy1 @ S.T
    g["enc_b1"] = gy1.sum(axis=1)
    return mse, g


def _init_weights(n_full, n_hidden, n_latent, mask, activation, seed) -> Autoencoder:
    rng = np.random.default_rng(seed)

    def draw(rows, cols):
        lim = 1.0 / np.sqrt(cols)
        return rng.uniform(-lim, lim, size=(rows, cols))

    return Autoencoder(
        enc_w1=draw(n_hidden, n_full), enc_b1=np.zeros(n_hidden),
        enc_w2=draw(n_latent, n_hidden), enc_b2=np.zeros(n_latent),
        dec_w1=draw(n_hidden, n_latent), dec_b1=np.zeros(n_hidden),
        dec_w2=draw(n_full, n_hidden) * mask, dec_b2=np.zeros(n_full),
        mask=mask, activation=activation)


def train_autoencoder(snapshots, n_s: int, config: AeConfig | None = None,
                      mask: np.ndarray | None = None) -> Autoencoder:
    """Train on snapshot columns. mask=None trains a dense decoder.

    The snapshot argument is a SnapshotMatrix or a plain (N_s, m) array.
    """
    cfg = config or AeConfig()
    S = np.asarray(getattr(snapshots, "data", snapshots), dtype=np.float64)
    if S.ndim != 2:
        raise ShapeError("snapshots must form a 2-D matrix")
    if not np.all(np.isfinite(S)):
        raise DomainError("non-finite snapshot entries")
    n_full, m = S.shape
    if n_s < 1:
        raise ConfigError(f"latent dimension must be >= 1, got {n_s}")
    if mask is not None:
        mask = np.asarray(mask, dtype=np.float64)
        if mask.shape[0] != n_full:
            raise ShapeError(f"mask rows {mask.shape[0]} != state dim {n_full}")
        if cfg.hidden_width is not None and cfg.hidden_width != mask.shape[1]:
            raise ConfigError(f"hidden_width {cfg.hidden_width} contradicts "
                              f"mask width {mask.shape[1]}")
        h = mask.shape[1]
    else:
        h = cfg.hidden_width if cfg.hidden_width is not None else n_full
        mask = np.ones((n_full, h))

    ae = _init_weights(n_full, h, n_s, mask, cfg.activation, cfg.seed)

    bs = m if cfg.batch_size is None else min(int(cfg.batch_size), m)
    if bs < 1:
        raise ConfigError(f"batch size must be >= 1, got {cfg.batch_size}")
    starts = range(0, m, bs)
    # snapshot columns are time-ordered, so contiguous minibatches would be
    # strongly correlated; reshuffle each epoch from a seed-derived stream
    shuffle = np.random.default_rng([cfg.seed, 7])

    moment1 = {k: np.zeros_like(getattr(ae, k)) for k in WEIGHT_NAMES}
    moment2 = {k: np.zeros_like(getattr(ae, k)) for k in WEIGHT_NAMES}
    lr, b1, b2 = cfg.learning_rate, ADAM_BETA1, ADAM_BETA2

    def apply(grads):
        nonlocal step
        step += 1
        c1 = 1.0 - b1 ** step
        c2 = 1.0 - b2 ** step
        for k in WEIGHT_NAMES:
            gk = grads[k]
            moment1[k] = b1 * moment1[k] + (1.0 - b1) * gk
            moment2[k] = b2 * moment2[k] + (1.0 - b2) * gk * gk
            getattr(ae, k)[...] -= (lr * (moment1[k] / c1)
                                    / (np.sqrt(moment2[k] / c2) + ADAM_EPS))
        ae.dec_w2 *= mask

    # history[e] is the exact full-batch MSE at the start-of-epoch weights;
    # the best snapshot is taken at the same weights the loss was measured on
    history = np.empty(cfg.epochs + 1)
    best = (np.inf, 0, None)
    step = 0
    for epoch in range(cfg.epochs + 1):
        grads = None
        if bs == m and epoch < cfg.epochs:
            loss, grads = loss_and_gradients(ae, S)
        else:
            rec = ae_decode(ae, ae_encode(ae, S)) - S
            loss = float(np.mean(rec * rec))
        if not np.isfinite(loss):
            raise TrainingError(f"training diverged at epoch {epoch} "
                                "(MSE became non-finite); try a smaller learning rate")
        history[epoch] = loss
        if loss < best[0]:
            best = (loss, epoch, {k: getattr(ae, k).copy() for k in WEIGHT_NAMES})
        if epoch == cfg.epochs:
            break
        if grads is not None:
            apply(grads)
        else:
            order = shuffle.permutation(m)
            for s0 in starts:
                _, gb = loss_and_gradients(ae, S[:, order[s0:s0 + bs]])
                apply(gb)

    if best[2] is not None:
        for k in WEIGHT_NAMES:
            getattr(ae, k)[...] = best[2][k]
    ae.record = TrainingRecord(epochs=cfg.epochs, seed=cfg.seed,
                               learning_rate=lr, initial_mse=float(history[0]),
                               final_mse=float(best[0]), best_epoch=best[1])
    ae.history = history
    return ae


def save(ae: Autoencoder, path) -> None:
    packed = np.packbits(ae.mask.astype(np.uint8), axis=1).tobytes()
    meta = dict(ae.meta)
    meta["activation"] = ae.activation
    if ae.record is not None:
        meta["record"] = asdict(ae.record)
    arrays = [(k, getattr(ae, k)) for k in WEIGHT_NAMES]
    if ae.history is not None:
        arrays.append(("loss_history", ae.history))
    write_container(path, MAGIC_AE, [ae.n_full, ae.n_hidden, ae.n_latent],
                    [], meta, arrays, raw=[("mask", packed)])


def load(path) -> Autoencoder:
    dims, _, meta, arrays, raw = read_container(path, MAGIC_AE)
    n_full, n_hidden, _ = (int(d) for d in dims)
    packed = np.frombuffer(raw["mask"], dtype=np.uint8).reshape(n_full, -1)
    mask = np.unpackbits(packed, axis=1, count=n_hidden).astype(np.float64)
    record = meta.get("record")
    extra = {k: v for k, v in meta.items()
             if k not in ("activation", "record", "arrays", "raw")}
    return Autoencoder(
        **{k: arrays[k] for k in WEIGHT_NAMES},
        mask=mask, activation=meta["activation"],
        record=TrainingRecord(**record) if record else None,
        history=arrays.get("loss_history"), meta=extra)
