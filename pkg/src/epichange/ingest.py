"""Reading delimited text, mean-binning and robust background estimates."""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .errors import BadBinCount, DegenerateScale, EmptySeries, MissingColumn, ParseError, TooShort
from .series import TimeSeries, build


def _sniff_delimiter(lines: list[str]) -> str:
    head = "".join(lines[:20])
    return "\t" if head.count("\t") > head.count(",") else ","


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_series(path: str | os.PathLike, column: str | int = 0, delimiter: str | None = None) -> TimeSeries:
    """Read one column of a delimited text file.

    Parameters
    ----------
    path
        UTF-8 text file. A first row containing any non-numeric cell is
        taken as a header.
    column
        Header name, or 0-based column position.
    delimiter
        ``","`` or ``"\\t"``; detected from the first lines when omitted.

    Raises
    ------
    MissingColumn
        If the named column is absent or the position is out of range.
    ParseError
        On a non-numeric cell, with its 1-based line number.
    EmptySeries
        If there are no data rows.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.readlines()
    delim = delimiter or _sniff_delimiter(lines)
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(lines, delimiter=delim)) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptySeries(f"{path}: no data")
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        if header is None or column not in header:
            raise MissingColumn(f"column {column!r} not found in {path}")
        pos = header.index(column)
    else:
        pos = int(column)
    values = []
    for line, r in rows:
        if pos < 0 or pos >= len(r):
            raise MissingColumn(f"line {line} of {path} has no column {pos}")
        cell = r[pos].strip()
        try:
            v = float(cell)
        except ValueError:
            raise ParseError(line, f"{path}: cannot parse {cell!r} as a number") from None
        if not math.isfinite(v):
            raise ParseError(line, f"{path}: non-finite value {cell!r}")
        values.append(v)
    if not values:
        raise EmptySeries(f"{path}: no data rows")
    return build(np.array(values))


def write_series(path: str | os.PathLike, ts: TimeSeries | np.ndarray, header: str | None = "value") -> None:
    """Write one value per line with 17 significant digits, so reads round-trip."""
    values = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        for v in values:
            fh.write("%.17g\n" % v)


def bin_mean(ts: TimeSeries, bins: int) -> TimeSeries:
    """Means over ``bins`` contiguous blocks whose sizes differ by at most one.

    Larger blocks come first, e.g. ``n=10, bins=3`` gives sizes 4, 3, 3.
    """
    if int(bins) != bins or not 1 <= bins <= ts.n:
        raise BadBinCount(f"bins must be an integer in [1, {ts.n}], got {bins}")
    return build(np.array([b.mean() for b in np.array_split(ts.values, int(bins))]))


def robust_background(ts: TimeSeries) -> tuple[float, float]:
    """Median and sample standard deviation (``ddof=1``) of the whole series.

    Raises
    ------
    DegenerateScale
        If the series is constant.
    """
    if ts.n < 2:
        raise TooShort(f"need at least 2 observations, got {ts.n}")
    mu0 = float(np.median(ts.values))
    sigma0 = float(np.std(ts.values, ddof=1))
    if not sigma0 > 0:
        raise DegenerateScale("series is constant; the Gaussian cost needs a positive scale")
    return mu0, sigma0
