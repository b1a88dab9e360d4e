"""Deterministic JSON and CSV serialization for run reports.

Floats are written with 17 significant digits so every value
round-trips exactly; object keys are emitted in sorted order so two
runs with the same inputs produce byte-identical documents.
"""

from __future__ import annotations

import json
from typing import IO, Iterable

import numpy as np


def format_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    text = format(float(x), ".17g")
    return text


def _serialize(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _serialize(obj.tolist(), out)
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            out.append(json.dumps(key))
            out.append(":")
            _serialize(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _serialize(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} as JSON")


def dumps(obj) -> str:
    """Serialize to a compact, key-sorted, round-trip-exact JSON string."""
    out: list = []
    _serialize(obj, out)
    return "".join(out)


def write_csv(stream: IO[str], header: Iterable[str], rows: Iterable[Iterable[float]]) -> None:
    """Write numeric rows with the same 17-digit formatting as the JSON output."""
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(format_float(v) for v in row) + "\n")


def trajectory_rows(times, bases, fibers):
    for t, x, y in zip(times, bases, fibers):
        yield [float(t), *map(float, x), *map(float, y)]
