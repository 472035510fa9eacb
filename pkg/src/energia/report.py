"""Report records, JSON lines and CSV output, and ordered parameter scans."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal
from fractions import Fraction
from typing import Any

import numpy as np

from .logpow import ConvergenceVerdict

ANCHORS = {
    "radial": "Example radial (finite energy iff p < n/(n+1))",
    "radial.dirichlet": "Sobolev criterion n=1",
    "radial.lp": "Example radial L^p property",
    "toric": "Prop. toric",
    "toric.beta": "Example phi_beta (beta < 1/2)",
    "divisorial": "Prop. divisorial",
    "divisorial.entropy": "Remark entropy (alpha > 1)",
    "blowup": "Prop. nofin",
    "legendre": "Legendre transform (toric setting)",
    "classify-integral": "log-power convergence rule",
}


def plain(x: Any) -> Any:
    """Convert to JSON-representable values; non-finite floats become ``None``."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating, Fraction, Decimal)):
        f = float(x)
        return f if math.isfinite(f) else None
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def record(
    module: str,
    operation: str,
    parameters: dict,
    verdict: ConvergenceVerdict | None = None,
    *,
    anchor: str | None = None,
    provenance: str | None = None,
    **extra,
) -> dict:
    """One report record. ``verdict`` may be absent for non-classifying operations."""
    out = {"module": module, "operation": operation, "parameters": dict(parameters)}
    if verdict is not None:
        out.update(verdict.to_dict())
    else:
        out.update(verdict=None, value=None)
    out["provenance"] = provenance or out.get("provenance") or "symbolic"
    out["anchor"] = anchor or ANCHORS.get(module, module)
    out.update(extra)
    return plain(out)


def withheld(module: str, operation: str, parameters: dict, reason: str, **extra) -> dict:
    """A record whose verdict is deliberately not given."""
    out = record(module, operation, parameters, provenance="numeric", **extra)
    out.update(verdict="Withheld", reason=reason)
    return out


def to_json_line(rec: dict) -> str:
    return json.dumps(rec, ensure_ascii=False, sort_keys=False)


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, ensure_ascii=False)
    return str(v)


def flatten(rec: dict) -> dict:
    """Parameters lifted to top-level columns, nested values JSON-encoded."""
    row = {k: v for k, v in rec.get("parameters", {}).items()}
    for k, v in rec.items():
        if k != "parameters":
            row.setdefault(k, v)
    return row


def to_csv(records: list[dict], columns: list[str] | None = None) -> str:
    rows = [flatten(r) for r in records]
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def scan_values(start, stop, step) -> list[float]:
    """``start, start + step, ...`` up to ``stop`` inclusive, stepped in decimal."""
    a, b, s = (Decimal(str(v)) for v in (start, stop, step))
    if not s > 0:
        raise ValueError("scan step must be positive")
    if b < a:
        raise ValueError("scan end lies before its start")
    out, v = [], a
    while v <= b:
        out.append(float(v))
        v += s
    return out


def parse_range(text: str) -> list[float]:
    """``"from:to:step"`` to a list of scan values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected from:to:step, got {text!r}")
    return scan_values(*(Decimal(p) for p in parts))


def ordered_map(fn, items, jobs: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a process pool; order is kept."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


__all__ = [
    "ANCHORS",
    "plain",
    "record",
    "withheld",
    "to_json_line",
    "to_csv",
    "read_csv",
    "flatten",
    "scan_values",
    "parse_range",
    "ordered_map",
]
