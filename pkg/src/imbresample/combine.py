"""SMOTE followed by a cleaning pass (SMOTE-ENN, SMOTE-Tomek)."""
from __future__ import annotations

import numpy as np

from .core import Dataset, ResampleOutput, SamplingStrategy, as_rng
from .oversample import smote
from .undersample import enn_family, tomek_links

COMBINE_VARIANTS = ("ENN", "TOMEK")


def compose(dataset: Dataset, first: ResampleOutput, second: ResampleOutput) -> ResampleOutput:
    """Express ``second`` (computed on ``first.apply(dataset)``) against ``dataset``.

    Rows of the intermediate table are the kept originals (in index order)
    followed by ``first``'s synthetic rows; survivors of each part are mapped
    back, keeping provenance of surviving synthetic rows.
    """
    n_kept = len(first.kept_indices)
    survivors = second.kept_indices
    orig = first.kept_indices[survivors[survivors < n_kept]]
    syn = survivors[survivors >= n_kept] - n_kept
    num = [first.synthetic_numeric[syn], second.synthetic_numeric]
    cat = [first.synthetic_categorical[syn], second.synthetic_categorical]
    return ResampleOutput(
        orig,
        np.vstack(num),
        np.vstack(cat),
        np.concatenate([first.synthetic_labels[syn], second.synthetic_labels]),
        np.concatenate([first.provenance_base[syn], second.provenance_base]),
        np.concatenate([first.provenance_neighbor[syn], second.provenance_neighbor]),
        np.concatenate([first.provenance_lambda[syn], second.provenance_lambda]),
        {**first.info, **second.info},
    )


def smote_then_clean(
    dataset: Dataset,
    variant: str = "ENN",
    strategy: SamplingStrategy | float = 0.1,
    k: int = 5,
    rng=None,
    *,
    enn_k: int = 3,
    enn_criterion: str = "mode",
) -> ResampleOutput:
    """SMOTE, then ENN (every class edited) or Tomek removal (both link members).

    Synthetic rows are ordinary minority rows for the cleaning stage, so
    cleaning can drop synthetic rows as well as original majority rows.
    """
    if variant not in COMBINE_VARIANTS:
        raise ValueError(f"variant must be one of {COMBINE_VARIANTS}, got {variant!r}")
    first = smote(dataset, strategy, k, as_rng(rng))
    augmented = first.apply(dataset)
    if variant == "ENN":
        second = enn_family(augmented, "ENN", enn_criterion, enn_k, clean="all")
    else:
        second = tomek_links(augmented, scope="both")
    return compose(dataset, first, second)
