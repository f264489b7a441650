"""JSON encoding of the package's values.

Complex scalars are ``[re, im]`` pairs and matrices are row-major nested
lists. Infinite orders and values are the strings ``"inf"`` and ``"-inf"``.
Whether an array is complex is decided by its expected rank: a POVM is a
rank-3 real array or a rank-4 array whose last axis holds ``[re, im]``.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .prob_core import Order, as_cond, as_joint, as_pmf
from .quantum_core import Ensemble, KrausChannel, as_density, as_povm, as_states


def _float(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def to_jsonable(obj):
    """Plain JSON-ready structure for numbers, arrays, quantum objects, reports and enums."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Ensemble):
        return {"states": to_jsonable(obj.states), "probs": to_jsonable(obj.probs)}
    if isinstance(obj, KrausChannel):
        return {"kraus": to_jsonable(obj.kraus)}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(_float(k) if isinstance(k, float) else k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if np.abs(obj.imag).max(initial=0.0) == 0.0:
                return to_jsonable(obj.real)
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1))
        return [to_jsonable(v) for v in obj] if obj.ndim else _float(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, complex):
        return [_float(obj.real), _float(obj.imag)]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators."""
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def _number(x) -> float:
    if isinstance(x, str):
        return Order.parse(x).value
    return float(x)


def _array(obj, rank: int) -> np.ndarray:
    """Real array of the given rank, or a complex one with a trailing [re, im] axis."""
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"not a numeric array: {exc}") from None
    if arr.ndim == rank:
        return arr
    if arr.ndim == rank + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    raise InputError(f"expected an array of rank {rank} (or {rank + 1} with [re, im] pairs), got shape {arr.shape}")


def load_order(obj) -> float:
    return Order.parse(obj).value if isinstance(obj, str) else _number(obj)


def load_pmf(obj) -> np.ndarray:
    return as_pmf(_array(obj, 1))


def load_joint(obj) -> np.ndarray:
    return as_joint(_array(obj, 2))


def load_cond(obj) -> np.ndarray:
    return as_cond(_array(obj, 2))


def load_state(obj) -> np.ndarray:
    return as_density(_array(obj, 2).astype(complex))


def load_states(obj) -> np.ndarray:
    if isinstance(obj, dict) and "states" in obj:
        obj = obj["states"]
    return as_states(_array(obj, 3).astype(complex))


def load_povm(obj) -> np.ndarray:
    if isinstance(obj, dict) and "povm" in obj:
        obj = obj["povm"]
    return as_povm(_array(obj, 3).astype(complex))


def load_ensemble(obj) -> Ensemble:
    if not isinstance(obj, dict) or "states" not in obj or "probs" not in obj:
        raise InputError('an ensemble is {"states": [...], "probs": [...]}')
    return Ensemble(_array(obj["states"], 3).astype(complex), _array(obj["probs"], 1))


def load_channel(obj) -> KrausChannel:
    if not isinstance(obj, dict) or "kraus" not in obj:
        raise InputError('a channel is {"kraus": [...]}')
    return KrausChannel(_array(obj["kraus"], 3).astype(complex), bool(obj.get("subnormalized", False)))


def read_json(source):
    """Parse inline JSON text, or the contents of a file when ``source`` names one."""
    if isinstance(source, (dict, list)):
        return source
    text = str(source)
    path = Path(text)
    try:
        if not text.lstrip().startswith(("[", "{")) and path.is_file():
            text = path.read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {source!r}: {exc}") from None
