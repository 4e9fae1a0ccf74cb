"""Resampling toolkit for heavily imbalanced binary tabular data.

Undersamplers, SMOTE-family oversamplers, combined methods, a small boosted
tree model with ordered target encoding, PR-AUC based reporting, and a
runtime growth study that decides which methods are tractable at full scale.
"""
from .core import (
    AlreadySatisfied,
    CategoricalUnsupported,
    DataError,
    Dataset,
    DegenerateSignal,
    EmptyClass,
    KTooLarge,
    ParseError,
    ResampleError,
    ResampleOutput,
    SamplingStrategy,
    SchemaMismatch,
    SeededRng,
    class_partition,
    read_csv_dataset,
    resolve_counts,
    write_csv_dataset,
)
from .registry import METHODS, RESAMPLERS, UnknownMethod, resampler, run_method

__version__ = "0.1.0"

__all__ = [
    "AlreadySatisfied",
    "CategoricalUnsupported",
    "DataError",
    "Dataset",
    "DegenerateSignal",
    "EmptyClass",
    "KTooLarge",
    "METHODS",
    "ParseError",
    "RESAMPLERS",
    "ResampleError",
    "ResampleOutput",
    "SamplingStrategy",
    "SchemaMismatch",
    "SeededRng",
    "UnknownMethod",
    "class_partition",
    "read_csv_dataset",
    "resampler",
    "resolve_counts",
    "run_method",
    "write_csv_dataset",
]
