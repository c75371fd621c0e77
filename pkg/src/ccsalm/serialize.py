"""JSON text with floats written to 17 significant digits.

``float(format(v, ".17g")) == v`` for every finite double, so files
written here round-trip bit-exactly.  Floats always carry a decimal
point or exponent so they do not come back as integers.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["dumps", "format_float", "loads"]


def format_float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    s = format(v, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _scalar(obj) -> str | None:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    return None


def _encode(obj, indent, level) -> str:
    s = _scalar(obj)
    if s is not None:
        return s
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        if indent is None:
            return "{" + ", ".join(items) + "}"
        pad = " " * (indent * (level + 1))
        return "{\n" + ",\n".join(pad + it for it in items) + "\n" + " " * (indent * level) + "}"
    if isinstance(obj, (list, tuple)):
        parts = [_encode(v, indent, level + 1) for v in obj]
        flat = all(_scalar(v) is not None for v in obj)
        if indent is None or flat:
            return "[" + ", ".join(parts) + "]"
        pad = " " * (indent * (level + 1))
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + " " * (indent * level) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int | None = None) -> str:
    """Serialize ``obj``; lists of scalars stay on one line even when indenting."""
    return _encode(obj, indent, 0)


def loads(text: str):
    return json.loads(text)
