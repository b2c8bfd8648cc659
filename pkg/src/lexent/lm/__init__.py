"""Phonotactic language models behind one contract."""

from __future__ import annotations

import json
from pathlib import Path

from ..core import DataError
from .base import OVERFLOW, FiniteDistribution, Overflow, PhonotacticModel
from .lstm import (
    LstmModel,
    NonFiniteWeightError,
    WeightDimensionError,
    WeightFileError,
    WeightSchemaError,
)
from .ngram import NGramModel, train_ngram
from .tabular import TabularModel

__all__ = [
    "OVERFLOW",
    "FiniteDistribution",
    "Overflow",
    "PhonotacticModel",
    "LstmModel",
    "NGramModel",
    "TabularModel",
    "train_ngram",
    "load_model",
    "WeightFileError",
    "WeightSchemaError",
    "WeightDimensionError",
    "NonFiniteWeightError",
]


def load_model(path) -> PhonotacticModel:
    """Open a model file of either backend, dispatching on its contents."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a JSON model file: {exc}") from exc
    if isinstance(obj, dict) and obj.get("kind") == "ngram":
        return NGramModel.load(path)
    if isinstance(obj, dict) and "lstm" in obj:
        return LstmModel.from_dict(obj, source=str(path))
    raise DataError(f"{path}: unrecognized model file")
