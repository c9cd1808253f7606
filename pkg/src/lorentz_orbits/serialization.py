"""JSON/CSV output with floats written at 17 significant digits.

The stdlib encoder always uses ``float.__repr__``; this small emitter keeps
numbers in the fixed ``%.17g`` form so reports are byte-stable and
round-trip exactly. Infinite values become ``{"flag": "infinite"}``.
"""
import csv
import dataclasses
import io
import json
import math

import numpy as np

INFINITE = {"flag": "infinite"}


def to_plain(obj):
    """Convert dataclasses, numpy scalars/arrays and tuples to JSON-ready values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj) + 0.0  # folds -0.0 into 0.0
        if math.isinf(v) and v > 0:
            return dict(INFINITE)
        if math.isinf(v):
            return {"flag": "-infinite"}
        if math.isnan(v):
            return {"flag": "nan"}
        return v
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    return obj


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = ": " if indent else ":"
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)) and not isinstance(obj, float):
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        out.append(format(obj, ".17g"))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        for i, (k, v) in enumerate(obj.items()):
            out.append(pad + json.dumps(k) + sep)
            _emit(v, indent, level + 1, out)
            out.append(("," if i < len(obj) - 1 else "") + nl)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        flat = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
        if flat or not indent:
            out.append("[")
            for i, v in enumerate(obj):
                _emit(v, 0, 0, out)
                if i < len(obj) - 1:
                    out.append(", " if indent else ",")
            out.append("]")
            return
        out.append("[" + nl)
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(("," if i < len(obj) - 1 else "") + nl)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent=2):
    out = []
    _emit(to_plain(obj), indent, 0, out)
    return "".join(out)


def from_flag(value):
    """Inverse of the infinity encoding for a single number."""
    if isinstance(value, dict) and value.get("flag") == "infinite":
        return math.inf
    if isinstance(value, dict) and value.get("flag") == "-infinite":
        return -math.inf
    if isinstance(value, dict) and value.get("flag") == "nan":
        return math.nan
    return value


def rows_to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(float(v), ".17g") if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()
