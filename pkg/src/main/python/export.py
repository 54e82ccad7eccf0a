"""Routines for data exports: JSON records, CSV tables and SVG plots."""

import csv
from fractions import Fraction
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, TextIO, Tuple

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure
import mpmath

from errors import UsageError

SVG_HASH_SALT = "xizero"


def digits_for(bits: int) -> int:
    """Significant decimal digits printed for a given working precision."""
    return int(math.ceil(bits * math.log10(2)))


def format_number(value, digits: int) -> str:
    """Decimal string of a real number, integers exactly.

    :param value: Integer, fraction, float or ``mpf``.
    :param digits: Significant digits for inexact values.
    """
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        value = mpmath.mpf(value.numerator) / value.denominator
    value = mpmath.mpf(value)
    if value == 0:
        return "0"
    return mpmath.nstr(value, digits, min_fixed=-4, max_fixed=digits, strip_zeros=False)


def _is_number(value) -> bool:
    return isinstance(value, (int, float, Fraction, mpmath.mpf)) and not isinstance(value, bool)


def flatten_record(row: Dict[str, Any], digits: int) -> Dict[str, Any]:
    """Turn a result row into a flat record of strings.

    ``(value, error)`` tuples become ``key`` and ``key_err``; plain numbers are
    inputs or exact and get ``key_err = "0"``; complex values are split into
    ``key_re`` and ``key_im``. Booleans and strings pass through.
    """
    out: Dict[str, Any] = {}

    def put(key, value, error):
        out[key] = format_number(value, digits)
        out[f"{key}_err"] = format_number(error, digits)

    for key, value in row.items():
        if isinstance(value, tuple) and len(value) == 2:
            value, error = value
        else:
            error = 0
        if isinstance(value, (complex, mpmath.mpc)):
            put(f"{key}_re", mpmath.re(value), error)
            put(f"{key}_im", mpmath.im(value), error)
        elif _is_number(value):
            put(key, value, error)
        elif value is None:
            out[key] = ""
        else:
            out[key] = value
    return out


def emit_json(rows: Iterable[Dict[str, Any]], stream: TextIO, digits: int) -> None:
    """Write a JSON list of flat records."""
    records = [flatten_record(row, digits) for row in rows]
    json.dump(records, stream, indent=2, ensure_ascii=True)
    stream.write("\n")


def emit_csv(rows: Iterable[Dict[str, Any]], stream: TextIO, digits: int) -> None:
    """Write a CSV table, the header is the union of all keys in order of appearance."""
    records = [flatten_record(row, digits) for row in rows]
    header: List[str] = []
    for record in records:
        header.extend(key for key in record if key not in header)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for record in records:
        writer.writerow([_csv_cell(record.get(key, "")) for key in header])


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def emit_plot(samples: Sequence[Tuple[Any, Any]], fname: Path, xtitle: str = "x", ytitle: str = "y") -> None:
    """Plot samples as one polyline with axes into an SVG file.

    The output is byte-identical for identical input.

    :param samples: ``(x, y)`` pairs, at least two.
    :param fname: File name to write to.
    :param xtitle: Label of the x axis.
    :param ytitle: Label of the y axis.

    :raises UsageError: Fewer than two samples or the file cannot be written.
    """
    if len(samples) < 2:
        raise UsageError("a plot needs at least two samples")
    xdata = [float(x) for x, _ in samples]
    ydata = [float(y) for _, y in samples]

    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig = Figure(figsize=(8, 5), dpi=100)
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(111)
        ax.axhline(0, color="0.6", linewidth=0.8)
        ax.plot(xdata, ydata, color="tab:blue", linewidth=1.2)
        ax.set_xlabel(xtitle)
        ax.set_ylabel(ytitle)
        try:
            fig.savefig(Path(fname), format="svg", metadata={"Date": None})
        except OSError as err:
            raise UsageError(f"cannot write plot {fname}: {err.strerror}") from None
