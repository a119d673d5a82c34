"""Deterministic CSV and JSON run artifacts.

CSV floats carry 17 significant digits (full round trip); JSON records are
key-sorted, timestamp-free, and refuse non-finite numbers, so identical
configurations produce byte-identical outputs regardless of thread count.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class RecordError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise RecordError(f"non-finite value in CSV output: {x}")
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header, rows) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    p.write_text("\n".join(lines) + "\n")
    return p


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.ndarray,)):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not math.isfinite(f):
            raise RecordError(f"non-finite numeric in run record: {f}")
        return f
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def write_record(path, record: dict) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    payload = _sanitize(record)
    p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return p
