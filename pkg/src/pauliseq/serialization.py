"""Deterministic JSON and matrix file I/O.

Floats are written with 17 significant digits, which round-trips every
double exactly and gives byte-identical files across platforms.  Key order is
insertion order, so callers control the layout.
"""

from importlib.metadata import PackageNotFoundError, version
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError

DIST_NAME = "artifact"


def tool_version():
    try:
        return version(DIST_NAME)
    except PackageNotFoundError:
        return "0+unknown"


def _float(v):
    if not math.isfinite(v):
        raise InvalidInputError(f"cannot serialize non-finite float {v}")
    text = format(v, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _render(obj, indent, level):
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _render({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_render(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [_render(v, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(items) + "]"
        return "[" + pad + ("," + pad).join(items) + end + "]"
    raise InvalidInputError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """Stable JSON text ending in a newline."""
    return _render(obj, indent, 0) + "\n"


def artifact(kind, config, result):
    """Envelope carrying the tool version and resolved config."""
    return {
        "tool": "pauliseq",
        "version": tool_version(),
        "kind": kind,
        "config": config,
        "result": result,
    }


def read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from exc


def unwrap(data):
    """Strip an :func:`artifact` envelope if present."""
    if isinstance(data, dict) and data.get("tool") == "pauliseq" and "result" in data:
        return data["result"]
    return data


def load_matrix(path):
    """Read a complex matrix from ``.npy`` or JSON ``{"real": [[..]], "imag": [[..]]}``."""
    path = Path(path)
    if path.suffix == ".npy":
        try:
            return np.load(path, allow_pickle=False).astype(complex)
        except ValueError as exc:
            raise InvalidInputError(f"{path}: unreadable matrix ({exc})") from exc
    data = unwrap(read_json(path))
    try:
        real = np.asarray(data["real"], dtype=float)
        imag = np.asarray(data.get("imag", np.zeros_like(real)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{path}: expected {{'real': ..., 'imag': ...}} ({exc})") from exc
    if real.shape != imag.shape:
        raise InvalidInputError(f"{path}: real and imag shapes differ")
    return real + 1j * imag


def matrix_record(U):
    return {"real": np.real(U).tolist(), "imag": np.imag(U).tolist()}
