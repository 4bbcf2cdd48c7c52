"""Render the CSVs the end-to-end acceptance run leaves in tests/_cache.

These only run when the numerical package's acceptance sweep has been
executed in this checkout (and, for the profile/latent kinds, when its CLI
is importable to mint a prediction); otherwise they skip. The fixture-based
tests next door cover the rendering logic unconditionally.
"""

import csv
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from lasdi_plots import (plot_heatmap, plot_latent, plot_profile,
                         plot_range_bars, plot_sv_decay)

B1D = Path(__file__).resolve().parents[2] / "tests" / "_cache" / "b1d-ls4"
HEAT = B1D.parent


def need(path):
    if not Path(path).exists():
        pytest.skip(f"acceptance artifact {path} not present")
    return Path(path)


def png_ok(p):
    p = Path(p)
    return p.exists() and p.stat().st_size > 0


def test_burgers_heatmap(tmp_path):
    out = plot_heatmap(need(B1D / "heatmap.csv"), tmp_path / "heat.png",
                       title="max relative error", xlabel="a", ylabel="w")
    assert png_ok(out)


def test_burgers_sv_decay(tmp_path):
    out = plot_sv_decay(need(B1D / "sv_decay.csv"), tmp_path / "decay.png")
    assert png_ok(out)


def test_range_bars_from_heat_sweep(tmp_path):
    rows = []
    for n in (2, 3, 4, 5):
        summary = HEAT / f"heat-ls{n}" / "summary.csv"
        if summary.exists():
            with open(summary) as f:
                s = next(csv.DictReader(f))
            rows.append((str(n), s["min_error"], s["max_error"]))
    if len(rows) < 2:
        pytest.skip("heat sweep summaries not present")
    sweep = tmp_path / "sweep.csv"
    with open(sweep, "w") as f:
        f.write("latent_dim,min_error,max_error\n")
        for r in rows:
            f.write(",".join(r) + "\n")
    assert png_ok(plot_range_bars(sweep, tmp_path / "bars.png",
                                  xlabel="latent dimension"))


def test_profile_and_latent_from_prediction(tmp_path):
    """Mint the showcase-point prediction through the real CLI, then plot."""
    need(B1D / "model.ldim")
    if shutil.which("lasdi") is None:
        pytest.skip("lasdi CLI not installed")
    proc = subprocess.run(
        ["lasdi", "predict", "--preset", "burgers1d-4pt", "--out", str(B1D),
         "--mu", "0.8,1.01"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    profile = next((B1D / "predict").glob("profile_*.csv"))
    latent = next((B1D / "predict").glob("latent_*.csv"))
    assert png_ok(plot_profile(profile, tmp_path / "profile.png"))
    assert png_ok(plot_latent(latent, tmp_path / "latent.png"))


def test_cli_end_to_end(tmp_path):
    out = tmp_path / "cli.png"
    proc = subprocess.run(
        [sys.executable, "-m", "lasdi_plots.cli", "--kind", "heatmap",
         "--input", str(need(B1D / "heatmap.csv")), "--output", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert png_ok(out)
