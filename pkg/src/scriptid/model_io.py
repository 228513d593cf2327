"""Versioned JSON model container for BLSTM and HMM models.

The document is self-describing: a version tag, a model kind, the training
configuration, and flat parameter arrays with declared shapes.  Loading
validates the version and every declared shape.
"""

from __future__ import annotations

import json

import numpy as np

from .blstm import BlstmNetwork
from .errors import ShapeError
from .hmm import GaussianHmm
from .standardize import NormalizationStats

FORMAT_VERSION = 1


def _pack(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "data": np.asarray(arr, dtype=float).ravel().tolist()}


def _unpack(obj: dict) -> np.ndarray:
    arr = np.asarray(obj["data"], dtype=float)
    shape = tuple(obj["shape"])
    if arr.size != int(np.prod(shape)):
        raise ShapeError(f"parameter payload does not match declared shape {shape}")
    return arr.reshape(shape)


def _blstm_payload(net: BlstmNetwork) -> dict:
    return {
        "config": {
            "input_size": net.input_size,
            "hidden_sizes": list(net.hidden_sizes),
            "n_classes": net.n_classes,
            "seed": net.seed,
        },
        "params": {k: _pack(v) for k, v in sorted(net.params.items())},
    }


def _blstm_from_payload(obj: dict) -> BlstmNetwork:
    cfg = obj["config"]
    params = {k: _unpack(v) for k, v in obj["params"].items()}
    net = BlstmNetwork(cfg["input_size"], tuple(cfg["hidden_sizes"]),
                       cfg["n_classes"], cfg.get("seed", 0), params=params)
    expected = BlstmNetwork(cfg["input_size"], tuple(cfg["hidden_sizes"]),
                            cfg["n_classes"], 0)
    for key, ref in expected.params.items():
        if key not in params:
            raise ShapeError(f"model file missing parameter {key!r}")
        if params[key].shape != ref.shape:
            raise ShapeError(f"parameter {key!r} has shape {params[key].shape}, "
                             f"expected {ref.shape}")
    return net


def _hmm_payload(model: GaussianHmm) -> dict:
    return {
        "pi": _pack(model.pi),
        "A": _pack(model.A),
        "means": _pack(model.means),
        "variances": _pack(model.variances),
    }


def _hmm_from_payload(obj: dict) -> GaussianHmm:
    model = GaussianHmm(_unpack(obj["pi"]), _unpack(obj["A"]),
                        _unpack(obj["means"]), _unpack(obj["variances"]))
    n = model.n_states
    if model.A.shape != (n, n) or model.means.shape != model.variances.shape:
        raise ShapeError("inconsistent HMM parameter shapes")
    return model


def save_model(path, *, kind: str, classes, model=None, models=None,
               stats: NormalizationStats | None = None, extra: dict | None = None):
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "classes": [str(c) for c in classes],
    }
    if kind == "blstm":
        doc["network"] = _blstm_payload(model)
    elif kind == "hmm":
        doc["models"] = {str(lab): _hmm_payload(m) for lab, m in models.items()}
    else:
        raise ShapeError(f"unknown model kind {kind!r}")
    if stats is not None:
        doc["standardizer"] = stats.to_dict()
    if extra:
        doc["extra"] = extra
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path) -> dict:
    """Returns {kind, classes, network|models, stats, extra} after validation."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ShapeError(f"unsupported model format version {doc.get('format_version')!r}")
    kind = doc.get("kind")
    out = {"kind": kind, "classes": doc["classes"], "extra": doc.get("extra", {})}
    if kind == "blstm":
        out["network"] = _blstm_from_payload(doc["network"])
    elif kind == "hmm":
        out["models"] = {lab: _hmm_from_payload(p) for lab, p in doc["models"].items()}
    else:
        raise ShapeError(f"unknown model kind {kind!r}")
    if "standardizer" in doc:
        out["stats"] = NormalizationStats.from_dict(doc["standardizer"])
    else:
        out["stats"] = None
    return out
