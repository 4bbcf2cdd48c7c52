"""The five figure styles, one function per kind.

Every function takes parsed CSV input paths and writes one PNG; rerunning
overwrites the same file. Matplotlib runs on the Agg backend so the
scripts work headless.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .reader import (read_heatmap, read_latent, read_profile,  # noqa: E402
                     read_range_bars, read_sv_decay)

NAN_COLOR = "#cccccc"
DPI = 150


def _edges(centers):
    c = np.asarray(centers, dtype=float)
    if len(c) == 1:
        half = 0.5 if c[0] == 0 else 0.05 * abs(c[0])
        return np.array([c[0] - half, c[0] + half])
    mid = 0.5 * (c[1:] + c[:-1])
    return np.concatenate([[c[0] - (mid[0] - c[0])], mid,
                           [c[-1] + (c[-1] - mid[-1])]])


def _finish(fig, ax, output, title, xlabel, ylabel):
    if title:
        ax.set_title(title)
    if xlabel:
        ax.set_xlabel(xlabel)
    if ylabel:
        ax.set_ylabel(ylabel)
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return out


def plot_heatmap(input_path, output, title=None, xlabel=None, ylabel=None):
    """Error color map with min/max annotations; NaN cells gray + crossed.

    A single-row CSV (one-parameter sweep) falls back to a line plot of
    error against the parameter.
    """
    data = read_heatmap(input_path)
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    if data.is_1d:
        ax.plot(data.xs, data.cells[0], marker="o", lw=1.2)
        ax.grid(alpha=0.3)
        return _finish(fig, ax, output, title, xlabel or "parameter",
                       ylabel or "max relative error")
    grid = np.ma.masked_invalid(np.asarray(data.cells, dtype=float))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad(NAN_COLOR)
    mesh = ax.pcolormesh(_edges(data.xs), _edges(data.ys), grid, cmap=cmap,
                         shading="flat")
    fig.colorbar(mesh, ax=ax, label="max relative error")
    if grid.count():
        lo = np.unravel_index(np.ma.argmin(grid), grid.shape)
        hi = np.unravel_index(np.ma.argmax(grid), grid.shape)
        for (r, c), tag in ((lo, "min"), (hi, "max")):
            ax.annotate(f"{tag} {grid[r, c]:.3g}",
                        (data.xs[c], data.ys[r]),
                        ha="center", va="center", fontsize=8,
                        bbox=dict(boxstyle="round,pad=0.15", fc="white",
                                  alpha=0.85, lw=0))
    for r in range(grid.shape[0]):
        for c in range(grid.shape[1]):
            if grid.mask is not np.ma.nomask and grid.mask[r, c]:
                ax.plot(data.xs[c], data.ys[r], marker="x", color="black",
                        ms=7, mew=1.5)
    return _finish(fig, ax, output, title, xlabel, ylabel)


def plot_sv_decay(input_paths, output, title=None, xlabel=None, ylabel=None):
    """Log-scale singular value decay; one curve per input file."""
    paths = [input_paths] if isinstance(input_paths, (str, Path)) \
        else list(input_paths)
    fig, ax = plt.subplots(figsize=(6.0, 4.4))
    for p in paths:
        idx, sigma = read_sv_decay(p)
        ax.semilogy(idx, sigma, marker=".", lw=1.0, label=Path(p).parent.name
                    if Path(p).parent.name not in ("", ".") else Path(p).stem)
    if len(paths) > 1:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, ax, output, title, xlabel or "index",
                   ylabel or "singular value")


def plot_latent(input_path, output, title=None, xlabel=None, ylabel=None):
    """Every latent coordinate against time."""
    t, names, series = read_latent(input_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.4))
    for name, z in zip(names, series):
        ax.plot(t, z, lw=1.2, label=name)
    ax.legend(fontsize=8, ncols=max(1, len(names) // 4))
    ax.grid(alpha=0.3)
    return _finish(fig, ax, output, title, xlabel or "t", ylabel or "z")


def plot_profile(input_path, output, title=None, xlabel=None, ylabel=None):
    """Final-time solution profile; dashed reference when present."""
    x, pred, ref = read_profile(input_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.4))
    ax.plot(x, pred, lw=1.4, label="prediction")
    if ref is not None:
        ax.plot(x, ref, lw=1.2, ls="--", label="reference")
        ax.legend(fontsize=9)
    ax.grid(alpha=0.3)
    return _finish(fig, ax, output, title, xlabel or "x", ylabel or "u")


def plot_range_bars(input_path, output, title=None, xlabel=None, ylabel=None):
    """Min-to-max error span per labeled case."""
    labels, lows, highs = read_range_bars(input_path)
    for i, (lo, hi) in enumerate(zip(lows, highs)):
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"range bar {labels[i]!r} has non-finite bounds")
    pos = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(0.9 + 1.1 * len(labels), 4.4))
    ax.vlines(pos, lows, highs, lw=6, color="#1f77b4", alpha=0.75)
    ax.plot(pos, lows, ls="none", marker="_", ms=16, mew=2, color="#1f77b4")
    ax.plot(pos, highs, ls="none", marker="_", ms=16, mew=2, color="#1f77b4")
    ax.set_xticks(pos, labels)
    ax.set_xlim(-0.6, len(labels) - 0.4)
    ax.grid(alpha=0.3, axis="y")
    return _finish(fig, ax, output, title, xlabel, ylabel or "relative error")
