"""JSON/CSV serialization: matrix records, specs, families and result tables.

Matrices travel as ``{"dim": [rows, cols], "entries": [[row, col, re, im], ...]}``
with zero-based indices; omitted entries are zero.  A few qubit operators
may also be named by string (see :data:`NAMED_OPERATORS`).
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np

from .errors import ValidationError
from .lindblad import SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, LindbladSpec
from .scalar import ScalarFn

SCHEMA_VERSION = "1"

NAMED_OPERATORS = {
    "identity": np.eye(2, dtype=complex),
    "zero": np.zeros((2, 2), dtype=complex),
    "sigma_x": SIGMA_X,
    "sigma_y": SIGMA_Y,
    "sigma_z": SIGMA_Z,
    "sigma_plus": SIGMA_PLUS,
    "sigma_minus": SIGMA_MINUS,
}


def _require_keys(obj, where, required=(), optional=()):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ValidationError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValidationError(f"{where}: missing key(s) {missing}")


def matrix_to_records(m):
    m = np.asarray(m)
    entries = [
        [int(r), int(c), float(m[r, c].real), float(m[r, c].imag)]
        for r in range(m.shape[0])
        for c in range(m.shape[1])
        if m[r, c] != 0
    ]
    return {"dim": [int(m.shape[0]), int(m.shape[1])], "entries": entries}


def matrix_from_records(obj, where="matrix"):
    if isinstance(obj, str):
        if obj not in NAMED_OPERATORS:
            raise ValidationError(f"{where}: unknown operator name {obj!r}; known: {sorted(NAMED_OPERATORS)}")
        return NAMED_OPERATORS[obj].copy()
    _require_keys(obj, where, ("dim", "entries"))
    dim = obj["dim"]
    if isinstance(dim, int):
        dim = [dim, dim]
    if len(dim) != 2 or any(not isinstance(n, int) or n < 1 for n in dim):
        raise ValidationError(f"{where}.dim: expected positive integer or [rows, cols]")
    m = np.zeros(tuple(dim), dtype=complex)
    for k, rec in enumerate(obj["entries"]):
        if len(rec) != 4:
            raise ValidationError(f"{where}.entries[{k}]: expected [row, col, re, im]")
        r, c, re, im = rec
        if not (0 <= r < dim[0] and 0 <= c < dim[1]):
            raise ValidationError(f"{where}.entries[{k}]: index ({r}, {c}) out of range")
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValidationError(f"{where}.entries[{k}]: non-finite value")
        m[r, c] = complex(re, im)
    return m


def spec_to_dict(spec: LindbladSpec):
    return {
        "hamiltonian": matrix_to_records(spec.hamiltonian),
        "noise_terms": [{"rate": r, "operator": matrix_to_records(v)} for r, v in spec.noise_terms],
    }


def spec_from_dict(obj, where="spec"):
    _require_keys(obj, where, ("hamiltonian",), ("noise_terms",))
    h = matrix_from_records(obj["hamiltonian"], f"{where}.hamiltonian")
    terms = []
    for k, term in enumerate(obj.get("noise_terms", [])):
        _require_keys(term, f"{where}.noise_terms[{k}]", ("rate", "operator"))
        rate = term["rate"]
        if not isinstance(rate, (int, float)) or rate < 0:
            raise ValidationError(f"{where}.noise_terms[{k}].rate: rate {rate!r} must be a nonnegative number")
        terms.append((rate, matrix_from_records(term["operator"], f"{where}.noise_terms[{k}].operator")))
    try:
        return LindbladSpec(h, tuple(terms))
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def scalar_from_dict(obj, where="coefficient"):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    try:
        return ScalarFn.from_dict(obj)
    except (ValidationError, TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def z_family_to_dict(specs: Sequence[LindbladSpec], coefficients: Sequence[ScalarFn], homogeneous=True):
    return {
        "terms": [
            {"generator": spec_to_dict(s), "coefficient": c.to_dict()} for s, c in zip(specs, coefficients)
        ],
        "homogeneous": homogeneous,
    }


# -- tables ---------------------------------------------------------------------


@dataclass
class Table:
    """Column-oriented task output."""

    name: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)


def _plain(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _csv_cell(x):
    x = _plain(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def emit_table(table: Table, fmt: str, path) -> Path:
    """Write ``table`` as CSV (header row + data) or a single JSON document."""
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([_csv_cell(v) for v in row])
    elif fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "table": table.name,
            "columns": list(table.columns),
            "rows": _plain(table.rows),
            "meta": _plain(table.meta),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1, allow_nan=False)
            fh.write("\n")
    else:
        raise ValidationError(f"unknown output format {fmt!r}")
    return path


def read_table(path) -> Table:
    """Inverse of :func:`emit_table` for JSON output."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {doc.get('schema_version')!r}")
    return Table(doc["table"], doc["columns"], doc["rows"], doc.get("meta", {}))


def superop_columns(d):
    """Column names for the column-major flattening of a ``d**2 x d**2`` map."""
    n = d * d
    names = []
    for c in range(n):
        for r in range(n):
            names += [f"re_{r}_{c}", f"im_{r}_{c}"]
    return names


def superop_cells(s):
    flat = np.asarray(s).reshape(-1, order="F")
    out = []
    for v in flat:
        out += [float(v.real), float(v.imag)]
    return out
