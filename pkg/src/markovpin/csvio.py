"""Deterministic CSV output: '#' metadata header, 17 significant digits, LF."""

from __future__ import annotations

import io
import math

import numpy as np


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value) + 0.0  # no negative zero
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(value)


def render(columns, rows, meta=None) -> str:
    """CSV text with ``# key: value`` lines, a header row and formatted rows."""
    buf = io.StringIO(newline="")
    for key, val in (meta or {}).items():
        buf.write(f"# {key}: {val}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def parse(text: str):
    """Inverse of :func:`render` for tests: ``(meta, columns, rows-of-str)``."""
    meta, body = {}, []
    for line in text.split("\n"):
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(":")
            meta[key.strip()] = val.strip()
        else:
            body.append(line.split(","))
    return meta, body[0], body[1:]
