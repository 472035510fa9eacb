"""Two-column text files: a header line, then ``x value`` rows.

Lines starting with ``#`` are comments; ``# key: value`` comments are
returned as metadata (the Legendre module stores the extension tag there).
Columns may be separated by whitespace or a comma.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

_SPLIT = re.compile(r"[,\s]+")


def load_columns(path) -> tuple[tuple[str, str], np.ndarray, np.ndarray, dict]:
    """Read a file; return ``(header, x, y, meta)``. ``x`` must increase strictly."""
    header = None
    xs, ys, meta = [], [], {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, val = line[1:].partition(":")
                if sep:
                    meta[key.strip()] = val.strip()
                continue
            fields = [f for f in _SPLIT.split(line) if f]
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(fields)}")
            if header is None:
                header = (fields[0], fields[1])
                continue
            try:
                xs.append(float(fields[0]))
                ys.append(float(fields[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if header is None:
        raise ValueError(f"{path}: missing header line")
    x, y = np.asarray(xs), np.asarray(ys)
    if x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError(f"{path}: first column must be strictly increasing (>= 2 rows)")
    return header, x, y, meta


def save_columns(path, x, y, header=("x", "value"), meta: dict | None = None) -> None:
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    lines.append(f"{header[0]} {header[1]}")
    lines.extend(f"{xi:.17g} {yi:.17g}" for xi, yi in zip(np.asarray(x), np.asarray(y)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
