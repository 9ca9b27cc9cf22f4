"""File formats: cocycle / two-loop / SFT / model inputs and deterministic JSON output."""

from __future__ import annotations

import hashlib
import json
import math
import sys
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .cocycle import PeriodicCocycle
from .errors import InvalidArgument, InvalidCocycle, ShapeMismatch
from .strong_connection import CenterStableModel
from .two_loop import SftCocycle, TwoLoopSpec

FORMAT_VERSION = "1.0"


# ------------------------------------------------------------------ output

def _encode(obj: Any) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, no whitespace, floats with 17 significant digits."""
    return _encode(obj)


def plain(obj: Any) -> Any:
    """The value ``dumps`` would write, as Python objects (for schema validation)."""
    return json.loads(dumps(obj))


# ------------------------------------------------------------------ schemas

@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files("cocycle_forge").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(instance: Any, name: str) -> None:
    """Raise InvalidArgument if ``instance`` does not match the bundled schema ``name``."""
    try:
        jsonschema.validate(instance, schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidArgument(f"{name} file invalid at {where}: {exc.message}") from None


# ------------------------------------------------------------------ inputs

def read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}") from None


def load_json(data: bytes, what: str) -> Any:
    try:
        return json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvalidArgument(f"{what} is not valid JSON: {exc}") from None


def digest(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(hashlib.sha256(c).digest())
    return h.hexdigest()


def _matrix(values, d: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.size != d * d:
        raise ShapeMismatch(f"{what} has {arr.size} entries, expected {d * d}")
    return arr.reshape(d, d)


def cocycle_to_record(c: PeriodicCocycle) -> dict:
    rec = {
        "format_version": FORMAT_VERSION,
        "dim": c.dim,
        "period": c.period,
        "matrices": [m.reshape(-1).tolist() for m in c.matrices],
    }
    if c.label is not None:
        rec["label"] = c.label
    return rec


def cocycle_from_record(rec: Any) -> PeriodicCocycle:
    validate(rec, "cocycle")
    d, ell = rec["dim"], rec["period"]
    if len(rec["matrices"]) != ell:
        raise ShapeMismatch(f"period {ell} but {len(rec['matrices'])} matrices")
    mats = np.array([_matrix(m, d, f"matrix {k}") for k, m in enumerate(rec["matrices"])])
    return PeriodicCocycle(mats, rec.get("label"))


def dump_cocycle(c: PeriodicCocycle) -> str:
    return dumps(cocycle_to_record(c))


def parse_cocycle(data: bytes | str) -> PeriodicCocycle:
    raw = data.encode() if isinstance(data, str) else data
    return cocycle_from_record(load_json(raw, "cocycle file"))


def cocycles_from_json(obj: Any) -> list[PeriodicCocycle]:
    """A single cocycle record or {"cocycles": [...]} (several periodic points)."""
    if isinstance(obj, dict) and "cocycles" in obj:
        if not isinstance(obj["cocycles"], list) or not obj["cocycles"]:
            raise InvalidArgument("'cocycles' must be a nonempty list")
        return [cocycle_from_record(r) for r in obj["cocycles"]]
    return [cocycle_from_record(obj)]


def twoloop_from_record(rec: Any, n: int | None = None) -> TwoLoopSpec:
    validate(rec, "twoloop")
    d = rec["dim"]
    n = n if n is not None else rec.get("n")
    if n is None:
        raise InvalidArgument("the dwell length n is missing (file field 'n' or flag --n)")
    return TwoLoopSpec(_matrix(rec["fixed"], d, "fixed"),
                       tuple(_matrix(t, d, f"transition {k}") for k, t in enumerate(rec["transition"])), n)


def twoloop_to_record(spec: TwoLoopSpec) -> dict:
    return {"format_version": FORMAT_VERSION, "dim": spec.fixed.shape[0], "n": spec.n,
            "fixed": spec.fixed.reshape(-1).tolist(),
            "transition": [t.reshape(-1).tolist() for t in spec.transition]}


def sft_from_record(rec: Any) -> SftCocycle:
    validate(rec, "sft")
    d = rec["dim"]
    alphabet = rec["alphabet"]
    if set(rec["assignment"]) != set(alphabet):
        raise InvalidCocycle("assignment keys must match the alphabet")
    mats = {a: _matrix(rec["assignment"][a], d, f"matrix for {a!r}") for a in alphabet}
    if "transitions" in rec:
        table = np.array(rec["transitions"], dtype=bool)
        if table.shape != (len(alphabet), len(alphabet)):
            raise ShapeMismatch("transition table must be |alphabet| x |alphabet|")
    else:
        table = np.ones((len(alphabet), len(alphabet)), dtype=bool)
    return SftCocycle(tuple(alphabet), table, mats)


def sft_to_record(s: SftCocycle) -> dict:
    return {"format_version": FORMAT_VERSION, "dim": s.dim, "alphabet": list(s.alphabet),
            "transitions": s.transitions.astype(int).tolist(),
            "assignment": {a: m.reshape(-1).tolist() for a, m in s.assignment.items()}}


def model_from_record(rec: Any) -> CenterStableModel:
    validate(rec, "model")
    return CenterStableModel(_matrix(rec["block"], 2, "block"), np.array(rec["seed"], dtype=float))


def model_to_record(m: CenterStableModel) -> dict:
    return {"format_version": FORMAT_VERSION, "block": m.block.reshape(-1).tolist(),
            "seed": m.seed.tolist()}
