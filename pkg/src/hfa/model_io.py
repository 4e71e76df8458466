"""JSON persistence for trained models.

One binary model serializes as a "hfa-model" object carrying the dual
coefficients, bias, coupling metric, kernel specs, training vectors and
Gram factors. A one-vs-rest collection serializes as "hfa-model-set"
with the class labels alongside. Floats are written with Python's
shortest round-trip repr, so loading reproduces decision values exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hfa.core import HfaModel
from hfa.data import Dataset
from hfa.linalg import KernelSpec
from hfa.metric import TransformMetric

__all__ = [
    "ModelFormatError",
    "ModelSet",
    "save_model",
    "load_model",
    "save_model_set",
    "load_model_set",
]

FORMAT_MODEL = "hfa-model"
FORMAT_MODEL_SET = "hfa-model-set"
VERSION = 1


class ModelFormatError(ValueError):
    """Model file is missing, malformed, or of an unexpected format."""


def _array(a: np.ndarray) -> list:
    return np.asarray(a, dtype=float).tolist()


def _dataset_record(d: Dataset) -> dict:
    return {"domain": d.domain, "X": _array(d.X), "y": [int(v) for v in d.y]}


def _kernel_record(spec: KernelSpec) -> dict:
    return {"family": spec.family, "gamma": spec.gamma}


def _model_record(model: HfaModel) -> dict:
    return {
        "source": _dataset_record(model.source),
        "target": _dataset_record(model.target),
        "kernel_source": _kernel_record(model.kernel_source),
        "kernel_target": _kernel_record(model.kernel_target),
        "metric": _array(model.metric.matrix),
        "metric_budget": model.metric.budget,
        "beta": _array(model.beta),
        "bias": model.bias,
        "ks_sqrt": _array(model.ks_sqrt),
        "kt_sqrt": _array(model.kt_sqrt),
        "kt_inv_sqrt": _array(model.kt_inv_sqrt),
        "objective_trace": _array(model.objective_trace),
    }


def _require(record: dict, key: str, path):
    if key not in record:
        raise ModelFormatError(f"{path}: missing field {key!r}")
    return record[key]


def _dataset_from(record: dict, path) -> Dataset:
    X = np.asarray(_require(record, "X", path), dtype=float)
    y = np.asarray(_require(record, "y", path), dtype=np.int64)
    if X.size == 0:
        X = X.reshape(0, 0)
    return Dataset(str(_require(record, "domain", path)), X, y)


def _kernel_from(record: dict, path) -> KernelSpec:
    gamma = record.get("gamma")
    return KernelSpec(str(_require(record, "family", path)), gamma)


def _model_from(record: dict, path) -> HfaModel:
    try:
        return HfaModel(
            source=_dataset_from(_require(record, "source", path), path),
            target=_dataset_from(_require(record, "target", path), path),
            kernel_source=_kernel_from(_require(record, "kernel_source", path), path),
            kernel_target=_kernel_from(_require(record, "kernel_target", path), path),
            metric=TransformMetric(
                np.asarray(_require(record, "metric", path), dtype=float),
                float(_require(record, "metric_budget", path)),
            ),
            beta=np.asarray(_require(record, "beta", path), dtype=float),
            bias=float(_require(record, "bias", path)),
            ks_sqrt=np.asarray(_require(record, "ks_sqrt", path), dtype=float),
            kt_sqrt=np.asarray(_require(record, "kt_sqrt", path), dtype=float),
            kt_inv_sqrt=np.asarray(_require(record, "kt_inv_sqrt", path), dtype=float),
            objective_trace=np.asarray(_require(record, "objective_trace", path), dtype=float),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: {exc}") from exc


def _load_json(path) -> dict:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    return payload


def save_model(model: HfaModel, path) -> None:
    """Write one binary model as a "hfa-model" JSON file."""
    record = {"format": FORMAT_MODEL, "version": VERSION}
    record.update(_model_record(model))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)
        fh.write("\n")


def load_model(path) -> HfaModel:
    """Read a "hfa-model" JSON file back into a model."""
    payload = _load_json(path)
    if payload.get("format") != FORMAT_MODEL:
        raise ModelFormatError(f"{path}: expected format {FORMAT_MODEL!r}, got {payload.get('format')!r}")
    return _model_from(payload, path)


@dataclass(frozen=True)
class ModelSet:
    """One-vs-rest model collection plus free-form metadata.

    metadata is a JSON-serializable dict for pipeline state that must
    travel with the models (e.g. feature standardization parameters).
    """

    models: tuple[tuple[int, HfaModel], ...]
    metadata: dict

    @property
    def classes(self) -> list[int]:
        return [c for c, _ in self.models]


def save_model_set(models, path, metadata: dict | None = None) -> None:
    """Write a one-vs-rest collection as a "hfa-model-set" JSON file.

    models is a list of (class label, model) pairs as produced by the
    multiclass trainer; class order is preserved.
    """
    record = {
        "format": FORMAT_MODEL_SET,
        "version": VERSION,
        "classes": [int(c) for c, _ in models],
        "models": [_model_record(m) for _, m in models],
        "metadata": metadata if metadata is not None else {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)
        fh.write("\n")


def load_model_set(path) -> ModelSet:
    """Read a "hfa-model-set" JSON file back into models plus metadata."""
    payload = _load_json(path)
    if payload.get("format") != FORMAT_MODEL_SET:
        raise ModelFormatError(f"{path}: expected format {FORMAT_MODEL_SET!r}, got {payload.get('format')!r}")
    classes = _require(payload, "classes", path)
    models = _require(payload, "models", path)
    if len(classes) != len(models):
        raise ModelFormatError(f"{path}: {len(classes)} classes but {len(models)} models")
    if len(models) == 0:
        raise ModelFormatError(f"{path}: empty model set")
    pairs = tuple((int(c), _model_from(m, path)) for c, m in zip(classes, models))
    metadata = payload.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ModelFormatError(f"{path}: metadata must be an object")
    return ModelSet(models=pairs, metadata=metadata)
