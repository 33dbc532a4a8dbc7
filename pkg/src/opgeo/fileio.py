"""Matrix and Lie-algebra file formats.

Matrices are JSON objects ``{"dim": n, "re": [[...]], "im": [[...]]}`` or CSV
files with ``n`` rows of ``2n`` columns (real and imaginary parts
interleaved). Lie-algebra specs are JSON ``{"name", "dim", "basis"}`` with
the basis a list of matrix objects.

JSON written here carries every float with 17 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import OpGeoError
from .subgroups import LieAlgebraSpec


class FormatError(OpGeoError, ValueError):
    """A file does not parse as the expected format."""


def _float17(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".16e")


def dumps(obj, indent: int | None = None) -> str:
    """JSON with floats written as ``%.16e`` (17 significant digits)."""
    pad = "" if indent is None else "\n"

    def enc(o, depth):
        inner = "" if indent is None else " " * (indent * (depth + 1))
        outer = "" if indent is None else " " * (indent * depth)
        sep = "," if indent is None else ",\n"
        if isinstance(o, (bool, np.bool_)) or o is None or isinstance(o, str):
            return json.dumps(o.item() if isinstance(o, np.bool_) else o)
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _float17(float(o))
        if isinstance(o, np.ndarray):
            return enc(o.tolist(), depth)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(str(k))}: {enc(v, depth + 1)}" for k, v in o.items()]
            return "{" + pad + sep.join(items) + pad + outer + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            items = [inner + enc(v, depth + 1) for v in o]
            return "[" + pad + sep.join(items) + pad + outer + "]"
        raise TypeError(f"not JSON serialisable: {type(o)}")

    return enc(obj, 0)


def matrix_to_dict(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_dict(d) -> np.ndarray:
    try:
        n = int(d["dim"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros((n, n))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad matrix object: {exc}") from exc
    if re.shape != (n, n) or im.shape != (n, n):
        raise FormatError(f"matrix entries do not match dim {n}")
    return re + 1j * im


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    try:
        vals = np.array([[float(c) for c in r] for r in rows])
    except ValueError:
        # one header row is allowed
        try:
            vals = np.array([[float(c) for c in r] for r in rows[1:]])
        except ValueError as exc:
            raise FormatError(f"non-numeric CSV entry: {exc}") from exc
    n = vals.shape[0]
    if vals.ndim != 2 or vals.shape[1] != 2 * n:
        raise FormatError(f"CSV must have n rows of 2n columns, got {vals.shape}")
    return vals[:, 0::2] + 1j * vals[:, 1::2]


def matrix_to_csv(a) -> str:
    a = np.asarray(a, dtype=complex)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in a:
        writer.writerow([_float17(v) for z in row for v in (z.real, z.imag)])
    return buf.getvalue()


def read_matrix(path) -> np.ndarray:
    """Load a matrix from a JSON or CSV file (sniffed from the content)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(str(exc)) from exc
    if text.lstrip().startswith("{"):
        try:
            return matrix_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return matrix_from_csv(text)


def write_matrix(path, a, fmt: str = "json") -> None:
    text = matrix_to_csv(a) if fmt == "csv" else dumps(matrix_to_dict(a), indent=2) + "\n"
    Path(path).write_text(text)


def spec_to_dict(spec: LieAlgebraSpec) -> dict:
    return {"name": spec.name, "dim": spec.dim, "basis": [matrix_to_dict(b) for b in spec.basis]}


def spec_from_dict(d) -> LieAlgebraSpec:
    try:
        basis = np.array([matrix_from_dict(b) for b in d["basis"]])
        return LieAlgebraSpec(str(d["name"]), int(d["dim"]), basis)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad Lie-algebra spec: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, OpGeoError):
            raise
        raise FormatError(f"bad Lie-algebra spec: {exc}") from exc


def read_spec(path) -> LieAlgebraSpec:
    try:
        return spec_from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(str(exc)) from exc
