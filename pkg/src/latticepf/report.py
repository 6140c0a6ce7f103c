"""Deterministic serialisation of experiment outputs (17 significant digits)."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written as ``%.17g``; non-finite floats become null."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


PLOT_TEMPLATE = """\
# gnuplot script: RMSE per time step for every (scheme, n) in {csv}
set datafile separator ","
set key autotitle columnhead
set xlabel "t"
set ylabel "RMSE"
set title "{title}"
set terminal pngcairo size 900,600
set output "rmse.png"
plot {series}
"""


def write_plot_script(path, csv_name: str, title: str, curves) -> None:
    series = ", \\\n     ".join(
        f"'{csv_name}' using 3:(strcol(1) eq '{scheme}' && $2 == {n} ? $4 : 1/0) "
        f"with linespoints title '{scheme} n={n}'"
        for scheme, n in curves
    )
    Path(path).write_text(PLOT_TEMPLATE.format(csv=csv_name, title=title, series=series or "0"))
