"""Name -> resampler table shared by the CLI, the pipeline and the benchmarks."""
from __future__ import annotations

import inspect
from typing import Callable

from . import combine, oversample, undersample
from .core import Dataset, ResampleOutput, SamplingStrategy, SeededRng


class UnknownMethod(KeyError):
    pass


def _none(dataset: Dataset, rng: SeededRng, ratio: float) -> ResampleOutput:
    import numpy as np

    return ResampleOutput.keep_only(dataset, np.arange(dataset.n_rows))


# name -> (function, takes ratio, takes rng, fixed keyword arguments)
_TABLE: dict[str, tuple[Callable, bool, bool, dict]] = {
    "none": (_none, True, True, {}),
    "random_under": (undersample.random_under, True, True, {}),
    "cluster_centroids": (undersample.cluster_centroids, True, True, {}),
    "near_miss": (undersample.near_miss, True, False, {}),
    "condensed_nn": (undersample.condensed_nn, False, True, {}),
    "tomek_links": (undersample.tomek_links, False, False, {}),
    "one_sided_selection": (undersample.one_sided_selection, False, True, {}),
    "enn": (undersample.enn_family, False, False, {"variant": "ENN"}),
    "renn": (undersample.enn_family, False, False, {"variant": "RENN"}),
    "allknn": (undersample.enn_family, False, False, {"variant": "AllKNN"}),
    "neighborhood_cleaning": (undersample.neighborhood_cleaning, False, False, {}),
    "instance_hardness_threshold": (undersample.instance_hardness_threshold, True, True, {}),
    "random_over": (oversample.random_over, True, True, {}),
    "smote": (oversample.smote, True, True, {}),
    "smote_nc": (oversample.smote, True, True, {}),
    "adasyn": (oversample.adasyn, True, True, {}),
    "borderline_smote": (oversample.borderline_smote, True, True, {}),
    "kmeans_smote": (oversample.kmeans_smote, True, True, {}),
    "svm_smote": (oversample.svm_smote, True, True, {}),
    "smote_enn": (combine.smote_then_clean, True, True, {"variant": "ENN"}),
    "smote_tomek": (combine.smote_then_clean, True, True, {"variant": "TOMEK"}),
}

METHODS = tuple(_TABLE)
RESAMPLERS = tuple(m for m in METHODS if m != "none")


def method_parameters(name: str) -> set:
    fn, _, _, fixed = _lookup(name)
    params = set(inspect.signature(fn).parameters) - {"dataset", "strategy", "rng"} - set(fixed)
    return params


def _lookup(name: str):
    try:
        return _TABLE[name]
    except KeyError:
        raise UnknownMethod(f"unknown method {name!r}; choose from {', '.join(METHODS)}") from None


def run_method(name: str, dataset: Dataset, rng: SeededRng, ratio: float = 0.1, **params) -> ResampleOutput:
    """Run a resampler by name. Unknown keyword parameters raise ``TypeError``."""
    fn, takes_ratio, takes_rng, fixed = _lookup(name)
    unknown = set(params) - method_parameters(name)
    if unknown:
        raise TypeError(f"{name} does not accept {sorted(unknown)}")
    if name == "smote_nc" and dataset.n_categorical == 0:
        raise ValueError("smote_nc needs at least one categorical column")
    kwargs = {**fixed, **params}
    if name == "none":
        return fn(dataset, rng, ratio)
    if takes_ratio:
        kwargs["strategy"] = SamplingStrategy(ratio)
    if takes_rng:
        kwargs["rng"] = rng
    return fn(dataset, **kwargs)


def resampler(name: str, ratio: float = 0.1, materialize: bool = True, **params) -> Callable:
    """Bind a method into a ``(dataset, rng)`` callable.

    With ``materialize`` the callable returns the resampled Dataset, so a
    timing of it covers building the output table; otherwise it returns the
    ResampleOutput.
    """
    _lookup(name)

    def run(dataset: Dataset, rng: SeededRng):
        out = run_method(name, dataset, rng, ratio, **params)
        return out.apply(dataset) if materialize else out

    run.__name__ = name
    return run
