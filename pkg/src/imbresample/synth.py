"""Synthetic imbalanced transaction-like datasets (stand-in for private data).

Majority rows: standard normal numeric features. Minority rows: a fraction
``overlap`` drawn like the majority, the rest around ``clusters`` centers
placed at distance ``separation`` from the origin. Categorical columns use a
1/(rank) frequency profile that is reversed for the minority class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DataError, Dataset, SeededRng


class InvalidRatio(DataError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_rows: int = 10_000
    fraud_ratio: float = 0.01
    n_numeric: int = 4
    n_categorical: int = 2
    clusters: int = 2
    separation: float = 3.0
    overlap: float = 0.3
    cardinality: int = 6
    seed: int = 0


def standard_normal(rng: SeededRng, n: int) -> np.ndarray:
    """Box-Muller on two stream draws per value."""
    u = rng.random(2 * n).reshape(n, 2)
    return np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * math.pi * u[:, 1])


def _draw_codes(rng: SeededRng, n: int, weights: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights) / np.sum(weights)
    codes = np.searchsorted(cdf, rng.random(n), side="right")
    return np.minimum(codes, len(weights) - 1)


def make_dataset(cfg: SynthConfig) -> Dataset:
    """Generate a dataset with exactly round(n_rows * fraud_ratio) minority rows."""
    if not (0 < cfg.fraud_ratio < 0.5):
        raise InvalidRatio(f"fraud_ratio must be in (0, 0.5), got {cfg.fraud_ratio}")
    n = int(cfg.n_rows)
    n_min = int(round(n * cfg.fraud_ratio))
    if n_min < 1:
        raise InvalidRatio(f"{n} rows at ratio {cfg.fraud_ratio} give no minority row")
    rng = SeededRng(cfg.seed)
    labels = np.zeros(n, dtype=np.int64)
    labels[rng.sample(n, n_min)] = 1
    minority = np.flatnonzero(labels == 1)

    p = cfg.n_numeric
    numeric = standard_normal(rng, n * p).reshape(n, p)
    if p:
        direction = standard_normal(rng, cfg.clusters * p).reshape(cfg.clusters, p)
        norms = np.sqrt((direction**2).sum(axis=1, keepdims=True))
        centers = cfg.separation * direction / np.where(norms > 0, norms, 1.0)
        shifted = rng.random(n_min) >= cfg.overlap
        which = rng.below(cfg.clusters, n_min)
        rows = minority[shifted]
        numeric[rows] += centers[which[shifted]]

    q = cfg.n_categorical
    ranks = np.arange(1, cfg.cardinality + 1, dtype=np.float64)
    categorical = np.zeros((n, q), dtype=np.int64)
    for j in range(q):
        codes = _draw_codes(rng, n, 1.0 / ranks)
        codes[minority] = _draw_codes(rng, n_min, 1.0 / ranks[::-1])
        categorical[:, j] = codes

    # recode categories in first-occurrence order so a CSV round trip is exact
    categories = []
    for j in range(q):
        _, first = np.unique(categorical[:, j], return_index=True)
        seen = np.unique(categorical[:, j])[np.argsort(first)]
        remap = np.empty(cfg.cardinality, dtype=np.int64)
        remap[seen] = np.arange(len(seen))
        categorical[:, j] = remap[categorical[:, j]]
        categories.append(tuple(f"v{int(v)}" for v in seen))
    return Dataset(
        numeric,
        categorical,
        labels,
        tuple(f"num_{j}" for j in range(p)),
        tuple(f"cat_{j}" for j in range(q)),
        tuple(categories),
        "is_fraud",
    )


def synth_schema(cfg: SynthConfig) -> dict:
    schema = {f"num_{j}": "numeric" for j in range(cfg.n_numeric)}
    schema.update({f"cat_{j}": "categorical" for j in range(cfg.n_categorical)})
    schema["is_fraud"] = "label"
    return schema
