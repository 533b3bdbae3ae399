"""Versioned text serialization for named parameter tensors.

One JSON document per file: a format/version pair, a free-form header
for the owning model, and each tensor with its shape and flat row-major
data. Python's JSON float formatting round-trips doubles exactly, so
save/load is bit-faithful.
"""
from __future__ import annotations

import json

import numpy as np

from ..errors import ModelFormatError, ParseError

FORMAT_NAME = "airpen-tensors"
FORMAT_VERSION = "v1"


def save_tensors(path: str, tensors: dict[str, np.ndarray], header: dict | None = None) -> None:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "header": header or {},
        "tensors": [
            {"name": name, "shape": list(arr.shape),
             "data": np.asarray(arr, dtype=np.float64).reshape(-1).tolist()}
            for name, arr in tensors.items()
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_tensors(path: str) -> tuple[dict[str, np.ndarray], dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: truncated or malformed tensor file: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ParseError(f"{path}: not an {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported version {doc.get('version')!r}, expected {FORMAT_VERSION}")
    tensors = {}
    for entry in doc.get("tensors", []):
        try:
            arr = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
            tensors[entry["name"]] = arr
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"{path}: malformed tensor entry: {e}") from None
    return tensors, doc.get("header", {})
