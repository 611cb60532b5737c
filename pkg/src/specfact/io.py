"""JSON documents and CSV time series.

Floats are written with :func:`repr` (shortest round-trip form, at most 17
significant digits) and keys are sorted, so equal inputs give byte-identical
files.
"""
from __future__ import annotations

import io as _io
import json
from pathlib import Path

import numpy as np

from .errors import DocumentError
from .ident import TimeSeries
from .rational import RationalMatrix
from .realization import StateSpaceRealization


def to_jsonable(obj):
    """Recursively convert arrays, complex numbers and library objects."""
    if isinstance(obj, (RationalMatrix, StateSpaceRealization)):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        return float(c.real) if c.imag == 0 else [float(c.real), float(c.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON text."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(obj, path):
    """Write :func:`dumps` output to ``path``."""
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    """Parse a JSON document, raising :class:`DocumentError` on failure."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError("$", f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def read_matrix(doc, path="$"):
    """:class:`RationalMatrix` from a parsed document."""
    return RationalMatrix.from_dict(doc, path)


def write_csv(ts, path=None):
    """Write a :class:`TimeSeries` as CSV with a header row.

    Returns the text when ``path`` is ``None``.
    """
    names = [f"y1_{j + 1}" for j in range(ts.m)] + [f"y2_{j + 1}" for j in range(ts.p)]
    buf = _io.StringIO()
    buf.write(",".join(names) + "\n")
    for row in ts.data:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    text = buf.getvalue()
    if path is None:
        return text
    Path(path).write_text(text, encoding="utf-8")
    return None


def read_csv(path, m=None):
    """Read a CSV written by :func:`write_csv`.

    The partition index defaults to the number of ``y1_*`` columns.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DocumentError("$", f"cannot read {path}: {exc}") from exc
    if len(lines) < 2:
        raise DocumentError("$", "CSV needs a header and at least one sample")
    header = [h.strip() for h in lines[0].split(",")]
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln.strip()])
    except ValueError as exc:
        raise DocumentError("$", f"non-numeric CSV value: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DocumentError("$", "CSV rows do not match the header")
    if m is None:
        m = sum(h.startswith("y1_") for h in header) or 1
    return TimeSeries(data, int(m))


__all__ = ["to_jsonable", "dumps", "write_json", "read_json", "read_matrix", "write_csv",
           "read_csv"]
