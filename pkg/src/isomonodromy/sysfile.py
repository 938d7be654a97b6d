"""JSON system files and result documents.

A system file is a JSON object::

    {
      "k": 2,
      "poles": [[0.0, 0.0], [1.0, 0.0]],
      "residues": [
        [[[0.3, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.1, 0.0]]],
        ...
      ],
      "tolerances": {"ode_rel_tol": 1e-12}
    }

Every complex number is a two-element ``[re, im]`` array and matrices are
lists of rows.  ``tolerances`` is optional and may set any field of
:class:`~isomonodromy.core.Tolerances`; absent fields keep their defaults.
Unknown top-level keys are rejected.  Floats are written in their shortest
round-trip form, so parsing a serialised system gives back identical values.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import fields
from importlib import resources

import numpy as np

from .core import DEFAULT_TOLERANCES, FuchsianSystem, Tolerances, require_valid
from .errors import FileFormatError

_TOL_FIELDS = {f.name for f in fields(Tolerances)}
_KEYS = {"k", "poles", "residues", "tolerances", "name"}


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _complex(value, where):
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise FileFormatError(f"{where}: expected a [re, im] pair of numbers, got {value!r}")
    re, im = float(value[0]), float(value[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise FileFormatError(f"{where}: non-finite value")
    return complex(re, im)


def _matrix(value, k, where):
    if not isinstance(value, list) or len(value) != k:
        raise FileFormatError(f"{where}: expected {k} rows")
    out = np.empty((k, k), dtype=np.complex128)
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != k:
            raise FileFormatError(f"{where}[{r}]: expected {k} entries")
        for c, entry in enumerate(row):
            out[r, c] = _complex(entry, f"{where}[{r}][{c}]")
    return out


def load_system(text: str) -> tuple[FuchsianSystem, Tolerances]:
    """Decode a system file without validating the system's invariants."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FileFormatError(exc.msg, exc.lineno, exc.colno) from exc
    except ValueError as exc:
        raise FileFormatError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise FileFormatError("top level must be a JSON object", 1, 1)
    unknown = set(doc) - _KEYS
    if unknown:
        raise FileFormatError(f"unknown keys: {', '.join(sorted(unknown))}")
    for key in ("k", "poles", "residues"):
        if key not in doc:
            raise FileFormatError(f"missing key {key!r}")
    k = doc["k"]
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise FileFormatError(f"k must be a positive integer, got {k!r}")
    poles, residues = doc["poles"], doc["residues"]
    if not isinstance(poles, list) or not isinstance(residues, list):
        raise FileFormatError("poles and residues must be arrays")
    if len(poles) != len(residues):
        raise FileFormatError(f"{len(poles)} poles but {len(residues)} residues")
    t = np.array([_complex(p, f"poles[{i}]") for i, p in enumerate(poles)], dtype=np.complex128)
    Q = np.array([_matrix(m, k, f"residues[{i}]") for i, m in enumerate(residues)],
                 dtype=np.complex128).reshape(len(residues), k, k)
    tol = DEFAULT_TOLERANCES
    if "tolerances" in doc:
        block = doc["tolerances"]
        if not isinstance(block, dict):
            raise FileFormatError("tolerances must be an object")
        bad = set(block) - _TOL_FIELDS
        if bad:
            raise FileFormatError(f"unknown tolerances: {', '.join(sorted(bad))}")
        for name, v in block.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise FileFormatError(f"tolerance {name} must be a number")
        try:
            tol = tol.replace(**{name: float(v) for name, v in block.items()})
        except ValueError as exc:
            raise FileFormatError(str(exc)) from exc
    return FuchsianSystem(t, Q), tol


def parse_system_file(text: str) -> tuple[FuchsianSystem, Tolerances]:
    """Decode and validate a system file."""
    system, tol = load_system(text)
    require_valid(system, tol)
    return system, tol


def complex_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def matrix_pairs(m) -> list:
    return [[complex_pair(z) for z in row] for row in np.asarray(m)]


def serialize_system(system: FuchsianSystem, tol: Tolerances | None = None) -> str:
    """System file text for ``system``; tolerances are written when they differ from the defaults."""
    doc = {
        "k": system.k,
        "poles": [complex_pair(p) for p in system.poles],
        "residues": [matrix_pairs(q) for q in system.residues],
    }
    if tol is not None and tol != DEFAULT_TOLERANCES:
        doc["tolerances"] = {name: getattr(tol, name) for name in sorted(_TOL_FIELDS)}
    return json.dumps(doc, indent=2) + "\n"


def fixture_names() -> list:
    root = resources.files("isomonodromy") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def fixture_text(name: str) -> str:
    path = resources.files("isomonodromy") / "fixtures" / f"{name}.json"
    if not path.is_file():
        raise KeyError(name)
    return path.read_text()


def digest(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


def dump_document(doc: dict) -> str:
    """Canonical text of a result document (sorted keys, shortest round-trip floats)."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


__all__ = ["load_system", "parse_system_file", "serialize_system", "complex_pair",
           "matrix_pairs", "fixture_names", "fixture_text", "digest", "dump_document"]
