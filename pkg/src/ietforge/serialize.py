"""JSON encoding of maps, runs and reports.

Exact scalars are written as strings (``"p/q"``, ``"a+b*sqrt(D)"``, ball
notation).  With ``approx=True`` every scalar becomes
``{"exact": ..., "approx": "<decimal>"}`` instead.
"""

from __future__ import annotations

import dataclasses
import enum
import json
from fractions import Fraction
from typing import Any

from .iem import Iem, PermPair
from .induction import InductionRun
from .numerics import Ball, QuadElem, approx as to_float, format_scalar, parse_scalar
from .rauzy import CocycleMatrix

_SCALARS = (Fraction, QuadElem, Ball)


def backend_of(value) -> str:
    if isinstance(value, Ball):
        return "ball"
    if isinstance(value, QuadElem):
        return f"quad:{value.D}"
    return "rational"


def encode(obj: Any, approx: bool = False) -> Any:
    """Turn nested library objects into JSON-ready data."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        raise TypeError("floats are not serialized; use exact scalars")
    if isinstance(obj, _SCALARS):
        s = format_scalar(obj)
        if approx:
            return {"exact": s, "approx": f"{to_float(obj):.12g}"}
        return s
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, PermPair):
        return {"top": list(obj.top), "bottom": list(obj.bottom)}
    if isinstance(obj, Iem):
        return iem_to_dict(obj, approx)
    if isinstance(obj, CocycleMatrix):
        return matrix_to_json(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v, approx) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v, approx) for v in obj]
    if hasattr(obj, "to_dict"):
        return encode(obj.to_dict(), approx)
    if dataclasses.is_dataclass(obj):
        return encode(dataclasses.asdict(obj), approx)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any, approx: bool = False) -> str:
    return json.dumps(encode(obj, approx), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def matrix_to_json(M: CocycleMatrix) -> dict:
    return {"alphabet": list(M.alphabet), "rows": [[str(v) for v in r] for r in M.rows]}


def matrix_from_json(doc: dict) -> CocycleMatrix:
    return CocycleMatrix(doc["alphabet"], [[int(v) for v in r] for r in doc["rows"]])


def iem_to_dict(T: Iem, approx: bool = False) -> dict:
    lam = T.lengths
    first = next(iter(lam.values()))
    return {
        "alphabet": list(T.alphabet),
        "top": list(T.top),
        "bottom": list(T.bottom),
        "backend": backend_of(first),
        "lengths": {a: encode(v, approx) for a, v in lam.items()},
    }


def iem_from_dict(doc: dict) -> Iem:
    """Inverse of :func:`iem_to_dict`; ``backend`` is informational."""
    lengths = doc["lengths"]
    if isinstance(lengths, dict):
        lam = {a: parse_scalar(v["exact"] if isinstance(v, dict) else v) for a, v in lengths.items()}
    else:
        lam = [parse_scalar(v) for v in lengths]
    perms = PermPair(tuple(doc["top"]), tuple(doc["bottom"]))
    return Iem(perms, lam, doc.get("alphabet"))


def run_to_dict(run: InductionRun, matrices: tuple[int, ...] = (), approx: bool = False) -> dict:
    """Per-step arrows, acceleration indices and the requested ``B(0, n)``."""
    z = run.zorich_times()
    m = run.mmy_times()
    out = {
        "start": iem_to_dict(run.iems[0], approx),
        "steps": [
            {"n": i + 1, "kind": a.kind.value, "winner": a.winner, "loser": a.loser}
            for i, a in enumerate(run.arrows)
        ],
        "zorich_times": z.times,
        "zorich_open": z.incomplete,
        "mmy_times": m.times,
        "mmy_open": m.incomplete,
        "matrices": {f"B(0,{n})": matrix_to_json(run.matrix(n)) for n in sorted(set(matrices)) if n <= run.N},
        "complete": run.complete,
    }
    if run.violation is not None:
        out["violation"] = {"step": run.violation.step, "letters": list(run.violation.letters)}
    if run.precision_error is not None:
        out["precision_exhausted"] = {"step": run.precision_error.step}
    return out
