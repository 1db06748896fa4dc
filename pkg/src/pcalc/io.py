"""Module files: JSON in, JSON out.

A module file looks like::

    {
      "field": {"prime": 2},
      "poset": {"kind": "grid", "shape": [3, 3]},
      "dims": {"0,0": 1, "1,0": 2},
      "maps": {"0,0->1,0": [[1], [0]]}
    }

Explicit posets use ``{"kind": "explicit", "elements": [...], "hasse": [[x, y], ...]}``
and their declared ids as keys.  Missing dims are 0; a missing map between
nonzero spaces is an error.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import exactla as la
from .errors import InputError, InvalidPoset
from .lattice import FinitePoset
from .persmod import PersistenceModule, module_from_ids


def element_key(x) -> str:
    if isinstance(x, tuple):
        return ",".join(str(int(c)) for c in x)
    return str(x)


def _parse_key(P: FinitePoset, key: str):
    if P.kind == "grid":
        try:
            x = tuple(int(c) for c in key.split(","))
        except ValueError:
            raise InputError(f"bad grid element key {key!r}", witness=key) from None
    else:
        x = key
    if x not in P:
        raise InputError(f"unknown element {key!r}", witness=key)
    return x


def parse_poset(spec: dict) -> FinitePoset:
    if not isinstance(spec, dict):
        raise InvalidPoset("poset must be an object")
    kind = spec.get("kind")
    if kind == "grid":
        shape = spec.get("shape")
        if not shape or not all(isinstance(m, int) and m >= 1 for m in shape):
            raise InvalidPoset("grid shape must be a nonempty list of positive integers", witness=shape)
        return FinitePoset.grid(shape)
    if kind == "explicit":
        elements = [str(x) for x in spec.get("elements", [])]
        hasse = spec.get("hasse", [])
        if not all(isinstance(e, (list, tuple)) and len(e) == 2 for e in hasse):
            raise InvalidPoset("hasse must be a list of [lower, upper] pairs")
        return FinitePoset.explicit(elements, [(str(a), str(b)) for a, b in hasse])
    raise InvalidPoset(f"unknown poset kind {kind!r}", witness=kind)


def poset_to_json(P: FinitePoset) -> dict:
    if P.kind == "grid":
        return {"kind": "grid", "shape": list(P.shape)}
    return {
        "kind": "explicit",
        "elements": [str(x) for x in P.elements],
        "hasse": [[str(P.elements[a]), str(P.elements[b])] for a, b in P.covers],
    }


def parse_module(obj: dict) -> PersistenceModule:
    if not isinstance(obj, dict):
        raise InputError("module file must be a JSON object")
    try:
        p = la.check_prime(obj.get("field", {}).get("prime", 2))
    except (ValueError, TypeError, AttributeError) as e:
        raise InputError(str(e)) from None
    P = parse_poset(obj.get("poset"))
    dims = {}
    for k, d in obj.get("dims", {}).items():
        if not isinstance(d, int) or d < 0:
            raise InputError(f"dimension at {k!r} must be a nonnegative integer", witness=k)
        dims[_parse_key(P, k)] = d
    maps = {}
    for k, m in obj.get("maps", {}).items():
        if "->" not in k:
            raise InputError(f"map key {k!r} must look like 'x->y'", witness=k)
        a, b = (_parse_key(P, s.strip()) for s in k.split("->", 1))
        try:
            arr = np.array(m, dtype=np.int64)
        except (ValueError, TypeError):
            raise InputError(f"map {k!r} is not an integer matrix", witness=k) from None
        rows, cols = dims.get(b, 0), dims.get(a, 0)
        if arr.size != rows * cols or (arr.size and arr.shape != (rows, cols)):
            raise InputError(f"map {k!r} has shape {arr.shape}, expected {(rows, cols)}", witness=k)
        maps[(a, b)] = la.mat(m, p, shape=(rows, cols))
    return module_from_ids(P, dims, maps, p)


def load_module(path) -> PersistenceModule:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON in {path}: {e.msg} at line {e.lineno}") from None
    return parse_module(obj)


def matrix_to_json(m: np.ndarray) -> list:
    return [[int(v) for v in row] for row in np.asarray(m)]


def module_to_json(F: PersistenceModule) -> dict:
    P = F.poset
    dims = {element_key(x): int(F.dims[i]) for i, x in enumerate(P.elements) if F.dims[i]}
    maps = {}
    for a, b in P.covers:
        if F.dims[a] and F.dims[b]:
            maps[f"{element_key(P.elements[a])}->{element_key(P.elements[b])}"] = matrix_to_json(F.maps[(a, b)])
    return {"field": {"prime": F.p}, "poset": poset_to_json(P), "dims": dims, "maps": maps}


def dumps(obj) -> str:
    """Canonical serialization: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def to_jsonable(x):
    """Tuples become ``"x,y"`` keys or lists; numpy scalars become ints."""
    if isinstance(x, dict):
        return {element_key(k) if isinstance(k, tuple) else str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, tuple):
        return [to_jsonable(v) for v in x]
    if isinstance(x, list):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x
