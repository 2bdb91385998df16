"""JSON input with schema validation; errors name the offending JSON pointer."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .connection import FrameJet, polyjet_from_json
from .exact import JetError
from .tensors import Tensor

__all__ = ["InputError", "load_json", "frame_from_json", "tensor_from_json", "load_frame", "load_tensor", "dump_json"]

RATIONAL = {"oneOf": [{"type": "string", "pattern": r"^-?[0-9]+(/0*[1-9][0-9]*)?$"}, {"type": "integer"}]}
INDEX = {"type": "integer", "minimum": 1}

POLYJET_SCHEMA = {
    "type": "object",
    "required": ["n_vars", "order", "terms"],
    "properties": {
        "n_vars": {"type": "integer", "minimum": 1},
        "order": {"type": "integer", "minimum": 0},
        "terms": {"type": "array", "items": {
            "type": "object", "required": ["exp", "val"],
            "properties": {"exp": {"type": "array", "items": {"type": "integer", "minimum": 0}}, "val": RATIONAL},
        }},
    },
}

FRAME_SCHEMA = {
    "type": "object",
    "required": ["n", "order", "sigma"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "order": {"type": "integer", "minimum": 0},
        "sigma": {"type": "array", "minItems": 1, "items": {"type": "array", "items": POLYJET_SCHEMA}},
    },
}

TENSOR_SCHEMA = {
    "type": "object",
    "required": ["space"],
    "properties": {
        "space": {"type": "object", "required": ["n"], "properties": {
            "n": {"type": "integer", "minimum": 1},
            **{k: {"type": "integer", "minimum": 0} for k in ("r", "p", "q")}}},
        "entries": {"type": "array", "items": {
            "type": "object", "required": ["val"],
            "properties": {**{k: {"type": "array", "items": INDEX} for k in ("sym", "cov", "con")}, "val": RATIONAL},
        }},
    },
}


class InputError(ValueError):
    def __init__(self, pointer: str, message: str, source: str | None = None):
        self.pointer = pointer or "/"
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}{self.pointer}: {message}")


def _pointer(parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _validate(data, schema, source, base=""):
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(base + _pointer(exc.absolute_path), exc.message, source) from None


def load_json(path):
    p = Path(path)
    try:
        return json.loads(p.read_text())
    except FileNotFoundError:
        raise InputError("", "file not found", str(path)) from None
    except json.JSONDecodeError as exc:
        raise InputError("", f"invalid JSON (line {exc.lineno}, column {exc.colno})", str(path)) from None


def frame_from_json(data, source: str | None = None) -> FrameJet:
    """Accepts a bare frame jet or any object with a ``frame`` member (e.g. normalize output)."""
    base = ""
    if isinstance(data, dict) and "frame" in data and "sigma" not in data:
        data, base = data["frame"], "/frame"
    _validate(data, FRAME_SCHEMA, source, base)
    n, order = data["n"], data["order"]
    sig = data["sigma"]
    if len(sig) != n:
        raise InputError(f"{base}/sigma", f"expected {n} rows, got {len(sig)}", source)
    rows = []
    for i, row in enumerate(sig):
        if len(row) != n:
            raise InputError(f"{base}/sigma/{i}", f"expected {n} entries, got {len(row)}", source)
        out = []
        for j, pj in enumerate(row):
            here = f"{base}/sigma/{i}/{j}"
            if pj["n_vars"] != n:
                raise InputError(f"{here}/n_vars", f"expected {n}", source)
            if pj["order"] != order:
                raise InputError(f"{here}/order", f"expected {order}", source)
            for t, term in enumerate(pj["terms"]):
                if len(term["exp"]) != n:
                    raise InputError(f"{here}/terms/{t}/exp", f"expected {n} exponents", source)
                if sum(term["exp"]) > order:
                    raise InputError(f"{here}/terms/{t}/exp", f"degree exceeds order {order}", source)
            out.append(polyjet_from_json(pj))
        rows.append(tuple(out))
    try:
        return FrameJet(n, order, tuple(rows))
    except JetError as exc:
        raise InputError(f"{base}/sigma", str(exc), source) from None


def tensor_from_json(data, source: str | None = None) -> Tensor:
    _validate(data, TENSOR_SCHEMA, source)
    sp = data["space"]
    n = sp["n"]
    want = {"sym": sp.get("r", 0), "cov": sp.get("p", 0), "con": sp.get("q", 0)}
    for e, entry in enumerate(data.get("entries", [])):
        for slot, size in want.items():
            idx = entry.get(slot, [])
            if len(idx) != size:
                raise InputError(f"/entries/{e}/{slot}", f"expected {size} indices", source)
            for h, i in enumerate(idx):
                if i > n:
                    raise InputError(f"/entries/{e}/{slot}/{h}", f"index {i} exceeds dimension {n}", source)
    return Tensor.from_json(data)


def load_frame(path) -> FrameJet:
    return frame_from_json(load_json(path), str(path))


def load_tensor(path) -> Tensor:
    return tensor_from_json(load_json(path), str(path))


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
