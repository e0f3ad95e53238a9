"""JSON and CSV formats.

Floats are written with 17 significant digits, so every float64 round-trips
exactly and repeated runs are byte-identical.  Complex entries are ``[re, im]``
pairs.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParameterError, ShapeError
from .groups import GroupTable
from .scheme import AssociationScheme
from .spectral import CharacterTable
from .tolerances import Tolerances


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _encode(obj: Any, out: list) -> None:
    if obj is None or isinstance(obj, (bool, str)):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ParameterError(f"cannot serialize non-finite value {obj}")
        text = format(obj, ".17g")
        # keep floats recognizable as floats
        if not any(c in text for c in ".en"):
            text += ".0"
        out.append(text)
    elif isinstance(obj, list):
        out.append("[")
        for k, v in enumerate(obj):
            if k:
                out.append(",")
            _encode(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, v) in enumerate(obj.items()):
            if k:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _encode(v, out)
        out.append("}")
    else:
        raise ParameterError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Deterministic compact JSON with a trailing newline."""
    out: list = []
    _encode(_plain(obj), out)
    return "".join(out) + "\n"


def write_text(text: str, path: str | Path | None) -> None:
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_json(path: str | Path) -> Any:
    with open(path) as fh:
        return json.load(fh)


def complex_matrix(rows) -> np.ndarray:
    """[[re, im]] entries (or plain numbers) to a complex array."""
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(np.complex128)
    raise ShapeError("expected a matrix of [re, im] pairs")


def complex_pairs(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=np.complex128)
    return np.stack([M.real, M.imag], axis=-1).tolist()


# schemes and groups ---------------------------------------------------------

def scheme_to_dict(s: AssociationScheme) -> dict:
    return {
        "n": s.n,
        "d": s.d,
        "classes": [A.reshape(-1).astype(int).tolist() for A in s.classes],
        "transpose_map": list(s.transpose_map),
        "labels": list(s.labels),
    }


def scheme_from_dict(data: dict) -> AssociationScheme:
    try:
        n, d = int(data["n"]), int(data["d"])
        flat = data["classes"]
        tmap = data["transpose_map"]
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"scheme JSON missing field {exc}") from None
    if len(flat) != d + 1 or any(len(c) != n * n for c in flat):
        raise ShapeError(
            "classes must be d+1 row-major lists of length n^2",
            witness={"n": n, "d": d},
        )
    classes = [np.asarray(c, dtype=np.int64).reshape(n, n) for c in flat]
    return AssociationScheme(tuple(classes), tuple(tmap), tuple(data.get("labels", ())))


def group_to_dict(g: GroupTable) -> dict:
    return {"order": g.order, "mul": g.mul.tolist()}


def group_from_dict(data: dict) -> GroupTable:
    mul = np.asarray(data["mul"], dtype=np.int64)
    if mul.shape != (int(data["order"]),) * 2:
        raise ShapeError("mul must be order x order")
    return GroupTable(mul)


def character_table_to_dict(ct: CharacterTable) -> dict:
    return {"class_sizes": list(ct.class_sizes), "chars": complex_pairs(ct.chars)}


def character_table_from_dict(data: dict) -> CharacterTable:
    return CharacterTable(tuple(data["class_sizes"]), complex_matrix(data["chars"]))


# chains, observables, graphs -----------------------------------------------

def chain_from_dict(data: dict) -> tuple:
    return np.asarray(data["p0"], dtype=np.float64), np.asarray(data["t"], dtype=np.float64)


def chain_to_dict(p0, t) -> dict:
    return {"p0": np.asarray(p0, dtype=np.float64), "t": np.asarray(t, dtype=np.float64)}


def observables_from_json(data) -> list:
    """A single [[re,im]] matrix or a list of them (one per site)."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 3:
        return [complex_matrix(data)]
    if arr.ndim == 4:
        return [complex_matrix(m) for m in data]
    raise ShapeError("observables must be a [[re,im]] matrix or a list of them")


def graph_from_dict(data: dict) -> np.ndarray:
    from .ifs import graph_from_edges

    return graph_from_edges(int(data["n"]), data["edges"])


def graph_to_dict(A: np.ndarray) -> dict:
    edges = [[int(x), int(y)] for x, y in np.argwhere(np.triu(A)) if x < y]
    return {"n": int(A.shape[0]), "edges": edges}


def tensor_dict(name: str, tensor, tol: Tolerances, **extra) -> dict:
    """Tensor output with its tolerance metadata."""
    T = np.asarray(tensor)
    data = complex_pairs(T) if np.iscomplexobj(T) else T
    out = {name: data, "shape": list(T.shape)}
    out.update(extra)
    out["tolerances"] = {"eig": tol.eig, "zero": tol.zero, "num": tol.num, "gs": tol.gs}
    return out


def rows_csv(header: list, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for x in row:
            if isinstance(x, (int, np.integer)):
                cells.append(str(int(x)))
            else:
                cells.append(format(float(x), ".17g"))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
