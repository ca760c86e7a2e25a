"""Deterministic text output: CSV with '#' config headers, and JSON.

Floats are written in scientific notation with 17 significant digits, which
round-trips every double exactly. Non-finite floats become ``inf``/``-inf``
in CSV and the strings ``"inf"``/``"-inf"``/``"nan"`` in JSON.
"""

import json
import math

import numpy as np


def fmt_float(x):
    x = float(x)
    if math.isfinite(x):
        return f"{x:.16e}"
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    s = str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def to_json(obj):
    """Compact, key-order-preserving JSON with fixed float formatting."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt_float(obj)
        return s if math.isfinite(obj) else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, (set, frozenset)):
        return to_json(sorted(obj))
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(command, config, columns, rows, notes=None):
    """CSV document; ``notes`` are extra ``# key: value`` header lines."""
    lines = [f"# everett-preclusion {command}", f"# config: {to_json(config)}"]
    for key, value in (notes or {}).items():
        lines.append(f"# {key}: {to_json(value)}")
    lines.append(",".join(columns))
    lines.extend(",".join(fmt_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def json_text(config, payload):
    return to_json({"config": config, **payload}) + "\n"


def parse_complex(pair):
    """``[re, im]`` (or a bare real) to ``complex``."""
    if isinstance(pair, (int, float)):
        return complex(pair)
    re, im = pair
    return complex(float(re), float(im))
