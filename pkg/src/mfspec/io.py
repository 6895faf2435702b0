"""Weight files, CSV curves and JSON reports.

Weight files and reports are JSON. Floats go through ``repr``, the shortest
string that parses back to the same double, so files round-trip exactly.
CSV cells use 17 significant digits.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BadLength
from .measure import WeightSystem, validate

CURVE_HEADER = ("q", "tau_nu", "tau_tilde", "tau_mu", "branch", "dtau")
SPECTRUM_HEADER = ("alpha", "f", "branch")


def read_weights(path) -> WeightSystem:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise BadLength(f"{path}: not a weight file ({exc})") from None
    if not isinstance(data, dict) or "base" not in data or "weights" not in data:
        raise BadLength(f"{path}: weight files need the keys 'base' and 'weights'")
    return validate(data["weights"], data["base"])


def weights_json(ws: WeightSystem, meta: dict | None = None) -> str:
    doc = ws.as_dict()
    if meta:
        doc["meta"] = meta
    return dumps(doc)


def write_weights(ws: WeightSystem, path, meta: dict | None = None) -> None:
    Path(path).write_text(weights_json(ws, meta))


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    """Deterministic JSON; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
