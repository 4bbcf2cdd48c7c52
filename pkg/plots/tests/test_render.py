"""Fixture-driven checks for every plot kind plus the error paths."""

import math
from pathlib import Path

import matplotlib.pyplot as plt
import pytest

from lasdi_plots import (CsvFormatError, plot_heatmap, plot_latent,
                         plot_profile, plot_range_bars, plot_sv_decay,
                         read_heatmap)
from lasdi_plots.cli import main
from lasdi_plots.render import NAN_COLOR

DATA = Path(__file__).with_name("data")


def png_ok(path):
    p = Path(path)
    return p.exists() and p.stat().st_size > 0 and p.read_bytes()[:4] == b"\x89PNG"


def test_heatmap_renders(tmp_path):
    out = plot_heatmap(DATA / "heatmap_3x3.csv", tmp_path / "h.png",
                       title="grid")
    assert png_ok(out)


def test_heatmap_empty_cell_parses_to_nan():
    data = read_heatmap(DATA / "heatmap_3x3.csv")
    assert math.isnan(data.cells[1][1])
    assert data.xs == [0.7, 0.8, 0.9]
    assert data.ys == [0.9, 1.0, 1.1]


def test_heatmap_nan_cell_rendered_distinctly(tmp_path):
    """The failed cell keeps its own color instead of a colormap value."""
    out = plot_heatmap(DATA / "heatmap_3x3.csv", tmp_path / "h.png")
    img = plt.imread(out)[:, :, :3]  # RGB in [0,1]

    nan_rgb = tuple(int(NAN_COLOR[i:i + 2], 16) / 255 for i in (1, 3, 5))
    close = (abs(img - nan_rgb).max(axis=2) < 0.02).sum()
    # one cell of a 3x3 mesh is a solid block, far bigger than any
    # incidental anti-aliasing hits
    assert close > 1000

    full = plot_heatmap(DATA / "heatmap_full.csv", tmp_path / "no_nan.png")
    img2 = plt.imread(full)[:, :, :3]
    assert (abs(img2 - nan_rgb).max(axis=2) < 0.02).sum() < close / 10


def test_heatmap_single_row_falls_back_to_line(tmp_path):
    out = plot_heatmap(DATA / "heatmap_1d.csv", tmp_path / "line.png")
    assert png_ok(out)


def test_sv_decay_single_and_overlay(tmp_path):
    assert png_ok(plot_sv_decay(DATA / "sv_decay_a.csv", tmp_path / "one.png"))
    assert png_ok(plot_sv_decay([DATA / "sv_decay_a.csv",
                                 DATA / "sv_decay_b.csv"],
                                tmp_path / "two.png"))


def test_latent_and_profile_and_bars(tmp_path):
    assert png_ok(plot_latent(DATA / "latent.csv", tmp_path / "z.png"))
    assert png_ok(plot_profile(DATA / "profile.csv", tmp_path / "u.png"))
    assert png_ok(plot_range_bars(DATA / "sweep.csv", tmp_path / "r.png"))


def test_rerender_overwrites(tmp_path):
    out = tmp_path / "again.png"
    plot_profile(DATA / "profile.csv", out)
    first = out.read_bytes()
    plot_profile(DATA / "profile.csv", out)
    assert png_ok(out) and len(out.read_bytes()) == len(first)


def test_malformed_cell_names_file_and_line():
    with pytest.raises(CsvFormatError, match=r"malformed\.csv:2"):
        read_heatmap(DATA / "malformed.csv")


def test_empty_csv_rejected():
    with pytest.raises(CsvFormatError, match="empty"):
        plot_sv_decay(DATA / "empty.csv", "/tmp/never.png")


def test_ragged_rows_rejected():
    with pytest.raises(CsvFormatError, match=r"ragged\.csv:3"):
        plot_latent(DATA / "ragged.csv", "/tmp/never.png")


def test_cli_success_and_failure(tmp_path, capsys):
    out = tmp_path / "cli.png"
    rc = main(["--kind", "heatmap", "--input", str(DATA / "heatmap_3x3.csv"),
               "--output", str(out), "--title", "t"])
    assert rc == 0 and png_ok(out)

    rc = main(["--kind", "latent", "--input", str(DATA / "ragged.csv"),
               "--output", str(tmp_path / "no.png")])
    assert rc == 1
    assert "ragged.csv:3" in capsys.readouterr().err

    rc = main(["--kind", "profile", "--input", str(DATA / "profile.csv"),
               "--input", str(DATA / "profile.csv"),
               "--output", str(tmp_path / "no2.png")])
    assert rc == 2
