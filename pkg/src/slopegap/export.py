"""Delimited and JSON output with a reproducibility header."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np

from . import __version__


def fmt(x) -> str:
    """Round-trip-safe text for a number: 17 significant digits for floats."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer, Fraction)):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def header(config: dict) -> dict:
    return {"tool": "slopegap", "version": __version__, "config": config}


def to_csv(columns, rows, config: dict) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header(config), sort_keys=True, default=_json_default) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    # JSON has no inf/nan; write them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(payload: dict, config: dict) -> str:
    doc = dict(header(config))
    doc.update(payload)
    return json.dumps(_clean(doc), indent=2, sort_keys=True, default=_json_default) + "\n"
