"""Deterministic JSON model files."""
from __future__ import annotations

import json
import math
import os

from .pipeline import TrainedModel

FORMAT = "csensemble-model"
VERSION = 1


class ModelFormatError(ValueError):
    """Model file that is corrupted, foreign or from another format version."""


def _clean(obj):
    # JSON has no NaN/inf; encode them as tagged strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return {"__float__": repr(obj)}
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _restore(obj):
    if isinstance(obj, dict):
        if set(obj) == {"__float__"}:
            return float(obj["__float__"])
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    return obj


def dumps(model: TrainedModel) -> str:
    """Serialized model text; identical models give identical text."""
    doc = {"format": FORMAT, "version": VERSION, "model": _clean(model.to_dict())}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def loads(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"corrupted model file: parse error at byte offset {e.pos} ({e.msg})") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError("not a model file")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"model format version {doc.get('version')!r} is not supported (expected {VERSION})")
    try:
        return TrainedModel.from_dict(_restore(doc["model"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"model file does not match the schema: {e}") from None


def save_model(model: TrainedModel, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as f:
        f.write(dumps(model))
    os.replace(tmp, path)


def load_model(path) -> TrainedModel:
    if not str(path):
        raise FileNotFoundError("empty model path")
    with open(path, "r", encoding="ascii") as f:
        return loads(f.read())
