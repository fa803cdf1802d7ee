"""Versioned JSON model blobs tied to the vocabulary they were trained against."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import scipy.sparse as sp

FORMAT_VERSION = 1


class FingerprintMismatch(ValueError):
    """Model and vocabulary do not belong together."""


def _encode(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype), "shape": list(obj.shape)}
    if sp.issparse(obj):
        m = sp.csr_matrix(obj)
        return {"__csr__": {"data": _encode(m.data), "indices": _encode(m.indices),
                            "indptr": _encode(m.indptr), "shape": list(m.shape)}}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj: Any) -> Any:
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=obj["dtype"]).reshape(obj["shape"])
        if "__csr__" in obj:
            d = obj["__csr__"]
            return sp.csr_matrix((_decode(d["data"]), _decode(d["indices"]), _decode(d["indptr"])),
                                 shape=tuple(d["shape"]))
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def model_to_dict(model, vocab_fingerprint: str | None = None) -> dict:
    return {"format_version": FORMAT_VERSION, "family": model.family,
            "feature_dim": model.feature_dim, "config": model.config, "seed": model.seed,
            "vocab_fingerprint": vocab_fingerprint, "params": _encode(model.params)}


def model_from_dict(doc: dict, vocab_fingerprint: str | None = None):
    from . import model_class

    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('format_version')!r}")
    stored = doc.get("vocab_fingerprint")
    if vocab_fingerprint is not None and stored is not None and stored != vocab_fingerprint:
        raise FingerprintMismatch(
            f"model was trained against vocabulary {stored[:12]}..., got {vocab_fingerprint[:12]}...")
    cls = model_class(doc["family"])
    model = cls(doc["feature_dim"], doc["config"], doc["seed"], _decode(doc["params"]))
    model.vocab_fingerprint = stored
    return model


def dumps_model(model, vocab_fingerprint: str | None = None) -> str:
    return json.dumps(model_to_dict(model, vocab_fingerprint), sort_keys=True) + "\n"


def save_model(model, path: str | Path, vocab_fingerprint: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_model(model, vocab_fingerprint).encode("utf-8"))


def load_model(path: str | Path, vocab_fingerprint: str | None = None):
    """Load a model; passing the current vocabulary's fingerprint enforces a match."""
    return model_from_dict(json.loads(Path(path).read_text("utf-8")), vocab_fingerprint)
