"""Minority-class generation methods (random duplication and the SMOTE family).

Each generated row records the original base row, the neighbor row it was
interpolated toward and the coefficient lambda, so that every synthetic value
can be replayed as ``base + lambda * (neighbor - base)``. Interpolation is
done in raw units; neighbor search runs on standardized features.

Stream consumption is fixed per method and documented on each function:
arrays are drawn whole, in the order listed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CategoricalUnsupported,
    DataError,
    Dataset,
    DegenerateSignal,
    ResampleOutput,
    SamplingStrategy,
    as_rng,
    class_partition,
    resolve_counts,
)
from .neighbors import NeighborIndex, clamp_k, feature_space, kmeans_fit, knn_query, linear_margin_fit, sub_index


_EMPTY = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), np.empty(0))


class MinorityTooSmall(DataError):
    pass


class NoBoundary(DegenerateSignal):
    pass


class NoDanger(DegenerateSignal):
    pass


class NoEligibleCluster(DegenerateSignal):
    pass


class NoSupportVectors(DegenerateSignal):
    pass


@dataclass(frozen=True)
class SmoteConfig:
    strategy: SamplingStrategy = SamplingStrategy()
    k_neighbors: int = 5
    n_clusters: int = 8
    density_exponent: float | None = None
    margin_epochs: int = 20
    margin_reg: float = 1e-3
    fallback: bool = False

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.density_exponent is not None and self.density_exponent <= 0:
            raise ValueError("density_exponent must be > 0")


def largest_remainder(total: int, weights) -> np.ndarray:
    """Integer apportionment of ``total`` proportional to ``weights``.

    Integer weights are handled exactly; float weights use
    quota = total * w / sum(w). Leftover units go to the largest fractional
    parts, ties to the lower index. The result always sums to ``total``.
    """
    weights = np.asarray(weights)
    if weights.size == 0 or total == 0:
        return np.zeros(weights.size, dtype=np.int64)
    if np.issubdtype(weights.dtype, np.integer):
        w = [int(v) for v in weights]
        denom = sum(w)
        floors = [total * v // denom for v in w]
        rems = [total * v % denom for v in w]
    else:
        import math

        w = [float(v) for v in weights]
        denom = math.fsum(w)
        quotas = [total * v / denom for v in w]
        floors = [int(math.floor(q)) for q in quotas]
        rems = [q - f for q, f in zip(quotas, floors)]
    counts = np.array(floors, dtype=np.int64)
    left = total - int(counts.sum())
    order = sorted(range(len(w)), key=lambda i: (-rems[i], i))
    for i in order[:left]:
        counts[i] += 1
    return counts


def _target_new(dataset: Dataset, strategy) -> tuple[np.ndarray, np.ndarray, int]:
    minority, majority = class_partition(dataset)
    target = resolve_counts(strategy, len(minority), len(majority), "over")
    return minority, majority, target - len(minority)


def _categorical_modes(dataset: Dataset, rows, nn_rows) -> np.ndarray:
    """Per row, the most frequent code among its neighbors (lowest code on ties)."""
    q = dataset.n_categorical
    out = np.empty((len(rows), q), dtype=np.int64)
    for j in range(q):
        card = len(dataset.categories[j])
        codes = dataset.categorical[nn_rows, j]
        counts = np.zeros((len(rows), card), dtype=np.int64)
        np.add.at(counts, (np.repeat(np.arange(len(rows)), codes.shape[1]), codes.ravel()), 1)
        out[:, j] = np.argmax(counts, axis=1)
    return out


def _build(dataset, minority, base_rows, neighbor_rows, lam, cat_rows, info=None) -> ResampleOutput:
    """Assemble the output; ``cat_rows`` gives categorical values per synthetic row."""
    xb = dataset.numeric[base_rows]
    xn = dataset.numeric[neighbor_rows]
    synth = xb + lam[:, None] * (xn - xb)
    label = int(dataset.labels[minority[0]])
    return ResampleOutput(
        np.arange(dataset.n_rows),
        synth,
        cat_rows,
        np.full(len(base_rows), label, dtype=np.int64),
        np.asarray(base_rows, dtype=np.int64),
        np.asarray(neighbor_rows, dtype=np.int64),
        np.asarray(lam, dtype=np.float64),
        info or {},
    )


def _minority_neighbors(index: NeighborIndex, minority, k: int) -> np.ndarray:
    """(n_min, k_eff) table of minority neighbors, as original row indices."""
    if len(minority) < 2:
        raise MinorityTooSmall("interpolation needs at least 2 minority rows")
    sub = sub_index(index, minority)
    k_eff = clamp_k(k, len(minority) - 1, what="minority neighbors")
    nn, _ = knn_query(sub, np.arange(len(minority)), k_eff, clamp=False)
    return minority[nn]


def _interpolate(dataset, minority, nn_table, base_pos, slots, lam, info=None) -> ResampleOutput:
    """Synthesize from base positions (into ``minority``) and neighbor slots."""
    base_rows = minority[base_pos]
    neighbor_rows = nn_table[base_pos, slots]
    if dataset.n_categorical:
        modes = _categorical_modes(dataset, minority, nn_table)
        cat = modes[base_pos]
    else:
        cat = np.empty((len(base_pos), 0), dtype=np.int64)
    return _build(dataset, minority, base_rows, neighbor_rows, lam, cat, info)


def random_over(dataset: Dataset, strategy: SamplingStrategy | float = 0.1, rng=None) -> ResampleOutput:
    """Add floor(N_maj * ratio) - N_min uniformly drawn minority duplicates.

    Draws: base positions. Provenance neighbor equals the base, lambda is 0.
    """
    minority, _, n_new = _target_new(dataset, strategy)
    base = minority[as_rng(rng).below(len(minority), n_new)]
    return _build(dataset, minority, base, base, np.zeros(n_new), dataset.categorical[base])


def smote(dataset: Dataset, strategy: SamplingStrategy | float = 0.1, k: int = 5, rng=None) -> ResampleOutput:
    """SMOTE, or SMOTE-NC when categorical columns are present.

    Draws: base positions, neighbor slots, lambdas. With categorical columns
    the heterogeneous metric is used and each generated categorical value is
    the most frequent one among the base's k minority neighbors.
    """
    rng = as_rng(rng)
    minority, _, n_new = _target_new(dataset, strategy)
    index = feature_space(dataset)
    nn = _minority_neighbors(index, minority, k)
    base = rng.below(len(minority), n_new)
    slots = rng.below(nn.shape[1], n_new)
    lam = rng.random(n_new)
    return _interpolate(dataset, minority, nn, base, slots, lam)


def _majority_counts(index, labels, minority, k, minority_label):
    k_eff = clamp_k(k, index.size - 1)
    nn, _ = knn_query(index, minority, k_eff, clamp=False)
    return (labels[nn] != minority_label).sum(axis=1), k_eff


def _fallback(dataset, strategy, k, rng, err):
    out = smote(dataset, strategy, k, rng)
    out.info["fallback"] = type(err).__name__
    return out


def adasyn(
    dataset: Dataset, strategy: SamplingStrategy | float = 0.1, k: int = 5, rng=None, *, fallback: bool = False
) -> ResampleOutput:
    """ADASYN: more synthetic rows for minority rows surrounded by majority rows.

    r_i is the majority share among row i's k nearest neighbors in the full
    data; per-row counts are the largest-remainder apportionment of the total
    over r (exact integer arithmetic). Draws: neighbor slots, lambdas.
    """
    rng = as_rng(rng)
    minority, _, n_new = _target_new(dataset, strategy)
    label = int(dataset.labels[minority[0]])
    index = feature_space(dataset)
    counts, _ = _majority_counts(index, dataset.labels, minority, k, label)
    if counts.sum() == 0:
        err = NoBoundary("no minority row has a majority neighbor")
        if fallback:
            return _fallback(dataset, strategy, k, rng, err)
        raise err
    nn = _minority_neighbors(index, minority, k)
    g = largest_remainder(n_new, counts.astype(np.int64))
    base = np.repeat(np.arange(len(minority)), g)
    slots = rng.below(nn.shape[1], n_new)
    lam = rng.random(n_new)
    return _interpolate(dataset, minority, nn, base, slots, lam, {"per_row_counts": g})


def borderline_smote(
    dataset: Dataset, strategy: SamplingStrategy | float = 0.1, k: int = 5, rng=None, *, fallback: bool = False
) -> ResampleOutput:
    """Borderline-SMOTE (variant 1): interpolate only from 'danger' minority rows.

    With f the majority share of a minority row's k nearest neighbors in the
    full data: safe f < 1/2, danger 1/2 <= f < 1, noise f = 1. Draws: base
    positions among danger rows, neighbor slots, lambdas.
    """
    rng = as_rng(rng)
    minority, _, n_new = _target_new(dataset, strategy)
    label = int(dataset.labels[minority[0]])
    index = feature_space(dataset)
    counts, k_eff = _majority_counts(index, dataset.labels, minority, k, label)
    danger = np.flatnonzero((2 * counts >= k_eff) & (counts < k_eff))
    if len(danger) == 0:
        err = NoDanger("no minority row is in danger")
        if fallback:
            return _fallback(dataset, strategy, k, rng, err)
        raise err
    nn = _minority_neighbors(index, minority, k)
    base = danger[rng.below(len(danger), n_new)]
    slots = rng.below(nn.shape[1], n_new)
    lam = rng.random(n_new)
    return _interpolate(dataset, minority, nn, base, slots, lam, {"danger": minority[danger]})


def mean_pairwise_distance(points) -> float:
    import math

    n = len(points)
    dists = []
    for i in range(n - 1):
        diff = points[i + 1 :] - points[i]
        acc = np.zeros(len(diff))
        for j in range(points.shape[1]):
            acc += diff[:, j] * diff[:, j]
        dists.extend(np.sqrt(acc).tolist())
    return math.fsum(dists) / len(dists)


def kmeans_smote(
    dataset: Dataset,
    strategy: SamplingStrategy | float = 0.1,
    n_clusters: int = 8,
    density_exponent: float | None = None,
    k: int = 5,
    rng=None,
    *,
    fallback: bool = False,
    n_init: int = 10,
) -> ResampleOutput:
    """K-means SMOTE.

    Clusters all rows (standardized), keeps clusters holding more minority
    than majority rows (and at least two minority rows), weights each by
    minority_count / mean_pairwise_minority_distance ** density_exponent
    (default exponent: number of numeric columns), apportions the synthetic
    total by largest remainder and runs SMOTE inside each cluster.

    Draws: the k-means restarts, then per kept cluster in id order: base
    positions, neighbor slots, lambdas.
    """
    if dataset.n_categorical:
        raise CategoricalUnsupported("k-means SMOTE needs numeric-only features")
    rng = as_rng(rng)
    minority, _, n_new = _target_new(dataset, strategy)
    label = int(dataset.labels[minority[0]])
    index = feature_space(dataset)
    n_clusters = clamp_k(n_clusters, dataset.n_rows, what="rows for clustering")
    model = kmeans_fit(index.points, n_clusters, rng, n_init=n_init)
    exponent = float(density_exponent if density_exponent is not None else max(dataset.n_numeric, 1))
    eligible, weights, members = [], [], []
    for c in range(n_clusters):
        rows = np.flatnonzero(model.assignments == c)
        mins = rows[dataset.labels[rows] == label]
        if len(mins) >= 2 and len(mins) > len(rows) - len(mins):
            spread = max(mean_pairwise_distance(index.points[mins]), 1e-12)
            eligible.append(c)
            weights.append(len(mins) / spread**exponent)
            members.append(mins)
    if not eligible:
        err = NoEligibleCluster("no cluster has more minority than majority rows")
        if fallback:
            return _fallback(dataset, strategy, k, rng, err)
        raise err
    per_cluster = largest_remainder(n_new, np.array(weights, dtype=np.float64))
    parts = []
    for mins, g in zip(members, per_cluster):
        if g == 0:
            continue
        nn = _minority_neighbors(index, mins, k)
        base = rng.below(len(mins), int(g))
        slots = rng.below(nn.shape[1], int(g))
        lam = rng.random(int(g))
        parts.append(_interpolate(dataset, mins, nn, base, slots, lam))
    if not parts:
        parts.append(_interpolate(dataset, minority, np.zeros((len(minority), 1), dtype=np.int64), *_EMPTY))
    return ResampleOutput(
        np.arange(dataset.n_rows),
        np.vstack([p.synthetic_numeric for p in parts]),
        np.empty((n_new, 0), dtype=np.int64),
        np.full(n_new, label, dtype=np.int64),
        np.concatenate([p.provenance_base for p in parts]),
        np.concatenate([p.provenance_neighbor for p in parts]),
        np.concatenate([p.provenance_lambda for p in parts]),
        {"clusters": eligible, "weights": weights, "per_cluster": per_cluster},
    )


def svm_smote(
    dataset: Dataset,
    strategy: SamplingStrategy | float = 0.1,
    k: int = 5,
    rng=None,
    *,
    fallback: bool = False,
    epochs: int = 20,
    reg: float = 1e-3,
) -> ResampleOutput:
    """SVM-SMOTE with a linear hinge-loss margin model.

    Bases are the minority rows on or inside the margin. A base whose k
    nearest neighbors (full data) are at least half minority interpolates
    toward a random one of its k minority neighbors with lambda in [0, 1];
    otherwise it steps toward its nearest minority neighbor with lambda in
    [0, 0.5], staying close to the base in majority-dominated regions.

    Draws: the margin model's shuffles, then base positions among support
    rows, neighbor slots, lambdas (halved for the shrunk case; the slot is
    drawn but unused there).
    """
    if dataset.n_categorical:
        raise CategoricalUnsupported("SVM-SMOTE needs numeric-only features")
    rng = as_rng(rng)
    minority, _, n_new = _target_new(dataset, strategy)
    label = int(dataset.labels[minority[0]])
    index = feature_space(dataset)
    margin = linear_margin_fit(index.points, dataset.labels == label, rng, epochs=epochs, reg=reg)
    is_support = np.zeros(dataset.n_rows, dtype=bool)
    is_support[margin.support_indices] = True
    support_pos = np.flatnonzero(is_support[minority])
    if len(support_pos) == 0:
        err = NoSupportVectors("no minority row lies on or inside the margin")
        if fallback:
            return _fallback(dataset, strategy, k, rng, err)
        raise err
    maj_counts, k_eff = _majority_counts(index, dataset.labels, minority[support_pos], k, label)
    interpolating = np.zeros(len(minority), dtype=bool)
    interpolating[support_pos] = 2 * (k_eff - maj_counts) >= k_eff
    nn = _minority_neighbors(index, minority, k)
    base = support_pos[rng.below(len(support_pos), n_new)]
    slots = rng.below(nn.shape[1], n_new)
    lam = rng.random(n_new)
    shrunk = ~interpolating[base]
    slots = np.where(shrunk, 0, slots)
    lam = np.where(shrunk, lam * 0.5, lam)
    return _interpolate(
        dataset, minority, nn, base, slots, lam, {"support": minority[support_pos], "margin": margin}
    )
