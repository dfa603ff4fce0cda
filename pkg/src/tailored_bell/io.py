"""JSON exchange format.

Real matrices are nested row-major lists, complex matrices nested lists of
[re, im] pairs.  Every document states its dimensions explicitly.  Floats are
written with 17 significant digits, which round-trips doubles exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .bases import BasisPair, OverlapMatrix
from .errors import DomainError, InvalidConfig, ShapeMismatch
from .functional import Behavior, QuantumRealization
from .search import SearchConfig, SearchResult


class FormatError(DomainError):
    """Malformed input document."""


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def _encode(obj, indent: int, level: int) -> str:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [_encode(v, indent, level + 1) for v in obj]
        # keep numeric rows on one line
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj) or _is_complex_row(obj):
            return "[" + ", ".join(parts) + "]"
        return "[" + pad + ("," + pad).join(parts) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _is_complex_row(obj) -> bool:
    return all(isinstance(v, (list, tuple)) and len(v) == 2 and not isinstance(v[0], (list, tuple)) for v in obj)


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def load_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc


def _field(doc, key):
    if key not in doc:
        raise FormatError(f"missing field {key!r}")
    return doc[key]


def encode_complex(m) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def decode_complex(data, shape=None) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim < 1 or a.shape[-1] != 2:
        raise FormatError("complex entries must be [re, im] pairs")
    m = a[..., 0] + 1j * a[..., 1]
    if shape is not None and m.shape != tuple(shape):
        raise ShapeMismatch(f"expected shape {tuple(shape)}, got {m.shape}")
    return m


def _dim(doc) -> int:
    d = _field(doc, "d")
    if not isinstance(d, int) or d < 1:
        raise FormatError(f"field 'd' must be a positive integer, got {d!r}")
    return d


# -- overlap and bases ---------------------------------------------------------


def overlap_doc(o: OverlapMatrix) -> dict:
    return {"d": o.dim, "overlap": o.entries}


def read_overlap(doc) -> OverlapMatrix:
    d = _dim(doc)
    o = np.asarray(_field(doc, "overlap"), dtype=float)
    if o.shape != (d, d):
        raise ShapeMismatch(f"overlap shape {o.shape} does not match d = {d}")
    return OverlapMatrix(o)


def bases_doc(pair: BasisPair) -> dict:
    return {"d": pair.dim, "e": encode_complex(pair.e_basis), "f": encode_complex(pair.f_basis)}


def read_bases(doc) -> BasisPair:
    d = _dim(doc)
    return BasisPair(decode_complex(_field(doc, "e"), (d, d)), decode_complex(_field(doc, "f"), (d, d)))


def n_bases_doc(bases) -> dict:
    bases = [np.asarray(b, dtype=complex) for b in bases]
    return {"d": bases[0].shape[0], "N": len(bases), "bases": [encode_complex(b) for b in bases]}


def read_n_bases(doc) -> list[np.ndarray]:
    d = _dim(doc)
    n = _field(doc, "N")
    bases = [decode_complex(b, (d, d)) for b in _field(doc, "bases")]
    if len(bases) != n:
        raise ShapeMismatch(f"'N' = {n} but {len(bases)} bases given")
    return bases


# -- behaviors and realizations -------------------------------------------------


def behavior_doc(beh: Behavior) -> dict:
    return {"d": beh.p.shape[1], "p": beh.p}


def read_behavior(doc) -> Behavior:
    d = _dim(doc)
    p = np.asarray(_field(doc, "p"), dtype=float)
    if p.shape != (2, d, d, 3, d):
        raise ShapeMismatch(f"behavior shape {p.shape} != {(2, d, d, 3, d)}")
    return Behavior(p)


def realization_doc(r: QuantumRealization, overlap: OverlapMatrix | None = None) -> dict:
    doc = {
        "d": r.d,
        "dims": list(r.dims),
        "state": encode_complex(r.state),
        "alice": encode_complex(r.alice),
        "bobP": encode_complex(r.bob_P),
        "bobQ": encode_complex(r.bob_Q),
    }
    if overlap is not None:
        doc["overlap"] = overlap.entries
    return doc


def read_realization(doc) -> tuple[QuantumRealization, OverlapMatrix | None]:
    d = _dim(doc)
    dims = _field(doc, "dims")
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(x, int) and x >= 1 for x in dims)):
        raise FormatError("'dims' must be two positive integers")
    d_a, d_b = dims
    r = QuantumRealization(
        decode_complex(_field(doc, "state"), (d_a * d_b, d_a * d_b)),
        decode_complex(_field(doc, "alice"), (d, d, d_a, d_a)),
        decode_complex(_field(doc, "bobP"), (d, d_b, d_b)),
        decode_complex(_field(doc, "bobQ"), (d, d_b, d_b)),
    )
    overlap = read_overlap({"d": d, "overlap": doc["overlap"]}) if "overlap" in doc else None
    return r, overlap


# -- search ----------------------------------------------------------------------

_CONFIG_KEYS = {"d", "restarts", "max_iters", "step_init", "step_min", "seed", "temperatures", "patience", "workers"}


def read_search_config(doc) -> SearchConfig:
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise InvalidConfig(f"unknown search config keys {sorted(unknown)}")
    _dim(doc)
    kwargs = dict(doc)
    if "temperatures" in kwargs:
        kwargs["temperatures"] = tuple(kwargs["temperatures"])
    return SearchConfig(**kwargs)


def search_config_doc(cfg: SearchConfig) -> dict:
    return {
        "d": cfg.d,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
        "step_init": cfg.step_init,
        "step_min": cfg.step_min,
        "seed": cfg.seed,
        "temperatures": list(cfg.temperatures),
        "patience": cfg.patience,
        "workers": cfg.workers,
    }


def search_result_doc(res: SearchResult) -> dict:
    doc = {
        "d": res.best_overlap.dim,
        "best_beta_L": res.best_beta_L,
        "best_restart": res.best_restart,
        "best_unitary": encode_complex(res.best_unitary),
        "best_overlap": res.best_overlap.entries,
        "restart_values": list(res.restart_values),
        "trajectory": [[int(i), float(v)] for i, v in res.trajectory],
    }
    if res.config is not None:
        doc["config"] = search_config_doc(res.config)
    return doc


def trajectory_csv(res: SearchResult) -> str:
    lines = ["iter,value"] + [f"{i},{format_float(v)}" for i, v in res.trajectory]
    return "\n".join(lines) + "\n"
