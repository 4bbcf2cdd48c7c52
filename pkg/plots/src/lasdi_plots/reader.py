"""Shared reader for every CSV the lasdi CLI emits.

This is the single cross-component contract: the plotting side never
imports the numerical package, it only agrees with it on these five
schemas. All values are plain decimal text; empty cells mean "no value"
(failed prediction) and parse to NaN.

  heatmap    header: ,p1_value,p1_value,...   (first parameter axis)
             rows:   p2_value,cell,cell,...   (one row per second value)
             a single data row means a 1-parameter sweep
  sv-decay   header: index,sigma[,retained_mass]
  latent     header: t,z1,z2,...,zn
  profile    header: x,predicted[,reference]
  range-bars header: label,min_error,max_error[,...]; extra columns ignored

Malformed input raises CsvFormatError naming the file and 1-based line.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass


class CsvFormatError(ValueError):
    pass


def _fail(path, line_no, why):
    raise CsvFormatError(f"{path}:{line_no}: {why}")


def _rows(path):
    try:
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise CsvFormatError(f"{path}: {exc.strerror or exc}") from exc
    if not rows:
        _fail(path, 1, "empty file")
    return rows


def _num(path, line_no, text, what):
    if text.strip() == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        _fail(path, line_no, f"{what} is not a number: {text!r}")


@dataclass
class HeatmapData:
    xs: list            # first-parameter values (header)
    ys: list            # second-parameter values (row labels)
    cells: list         # row-major [len(ys)][len(xs)], NaN for empty cells

    @property
    def is_1d(self) -> bool:
        return len(self.ys) == 1


def read_heatmap(path) -> HeatmapData:
    rows = _rows(path)
    if len(rows) < 2:
        _fail(path, 1, "heatmap needs a header row and at least one data row")
    header = rows[0]
    if len(header) < 2:
        _fail(path, 1, "heatmap header needs at least one parameter column")
    xs = [_num(path, 1, c, "header value") for c in header[1:]]
    ys, cells = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            _fail(path, i, f"expected {len(header)} columns, got {len(row)}")
        ys.append(_num(path, i, row[0], "row label"))
        cells.append([_num(path, i, c, "cell") for c in row[1:]])
    return HeatmapData(xs=xs, ys=ys, cells=cells)


def read_columns(path, least: int, kind: str):
    """Header + uniform float columns; shared by the remaining schemas."""
    rows = _rows(path)
    header = rows[0]
    if len(header) < least:
        _fail(path, 1, f"{kind} needs at least {least} columns, "
                       f"got {len(header)}")
    if len(rows) < 2:
        _fail(path, 2, f"{kind} has no data rows")
    cols = [[] for _ in header]
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            _fail(path, i, f"expected {len(header)} columns, got {len(row)}")
        for c, text in zip(cols, row):
            c.append(_num(path, i, text, "value"))
    return [h.strip() for h in header], cols


def read_sv_decay(path):
    header, cols = read_columns(path, 2, "singular value decay")
    return cols[0], cols[1]


def read_latent(path):
    header, cols = read_columns(path, 2, "latent trajectory")
    return cols[0], header[1:], cols[1:]


def read_profile(path):
    header, cols = read_columns(path, 2, "profile")
    ref = cols[2] if len(cols) > 2 else None
    return cols[0], cols[1], ref


def read_range_bars(path):
    """Labels stay text; a category axis is not numeric."""
    rows = _rows(path)
    header = rows[0]
    if len(header) < 3:
        _fail(path, 1, f"range bars need label,min,max columns, "
                       f"got {len(header)}")
    labels, lows, highs = [], [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            _fail(path, i, f"expected {len(header)} columns, got {len(row)}")
        labels.append(row[0])
        lows.append(_num(path, i, row[1], "min"))
        highs.append(_num(path, i, row[2], "max"))
    if not labels:
        _fail(path, 2, "range bars have no data rows")
    return labels, lows, highs
