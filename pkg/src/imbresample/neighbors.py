"""Exact nearest-neighbor search, Lloyd k-means and a linear hinge-loss margin model.

All feature-dimension reductions are accumulated column by column, left to
right, and all cross-row totals that feed a decision use ``math.fsum``; a
plain loop reimplementation therefore reproduces every distance bit-for-bit,
which keeps tie-breaking and selection decisions exactly comparable.
"""
from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import EmptyClass, KTooLarge, SeededRng, as_rng, standardize

_BLOCK_ELEMS = 1 << 22


class KClampWarning(UserWarning):
    pass


def clamp_k(k: int, available: int, *, what: str = "neighbors") -> int:
    """Clamp k to the number of candidates, warning when it bites."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if available < 1:
        raise KTooLarge(f"no candidate {what} available")
    if k > available:
        warnings.warn(f"k={k} clamped to {available} available {what}", KClampWarning, stacklevel=3)
        return available
    return k


def squared_distances(q_num, q_cat, r_num, r_cat, delta2: float = 0.0) -> np.ndarray:
    """Dense (len(q), len(r)) matrix of squared heterogeneous distances."""
    acc = np.zeros((q_num.shape[0], r_num.shape[0]))
    for j in range(q_num.shape[1]):
        diff = q_num[:, j, None] - r_num[None, :, j]
        acc += diff * diff
    if q_cat is not None and q_cat.shape[1]:
        mism = np.zeros(acc.shape, dtype=np.int64)
        for j in range(q_cat.shape[1]):
            mism += q_cat[:, j, None] != r_cat[None, :, j]
        acc += delta2 * mism
    return acc


def _smallest_k(d2: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise k smallest by (value, column index)."""
    nq, nr = d2.shape
    if k == nr:
        order = np.argsort(d2, axis=1, kind="stable")
        return order, np.take_along_axis(d2, order, axis=1)
    thr = np.partition(d2, k - 1, axis=1)[:, k - 1 : k]
    below = d2 < thr
    n_below = below.sum(axis=1, keepdims=True)
    at = d2 == thr
    take_at = at & (np.cumsum(at, axis=1) <= (k - n_below))
    rows, cols = np.nonzero(below | take_at)
    cols = cols.reshape(nq, k)
    vals = d2[rows, cols.ravel()].reshape(nq, k)
    order = np.argsort(vals, axis=1, kind="stable")
    return np.take_along_axis(cols, order, axis=1), np.take_along_axis(vals, order, axis=1)


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    """Reference points for exact search.

    ``points`` are already standardized numeric features; ``categorical``
    codes contribute ``delta ** 2`` to the squared distance per mismatch.
    """

    points: np.ndarray
    categorical: np.ndarray | None = None
    delta: float = 0.0

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def delta2(self) -> float:
        return self.delta * self.delta

    def sq_dist(self, q_num, q_cat=None) -> np.ndarray:
        return squared_distances(q_num, q_cat, self.points, self.categorical, self.delta2)

    def query(self, q_num, q_cat=None, k: int = 1, exclude=None, farthest: bool = False):
        """k nearest (or farthest) reference rows for each query.

        ``exclude`` gives, per query, one reference position to skip (-1 for
        none); this is how self-matches are removed. Returns ``(indices,
        distances)`` sorted by distance (descending when ``farthest``), ties
        by ascending reference index.
        """
        q_num = np.asarray(q_num, dtype=np.float64)
        nq = q_num.shape[0]
        candidates = self.size - (0 if exclude is None else 1)
        if k < 1 or k > candidates:
            raise KTooLarge(f"k={k} but only {candidates} candidates")
        idx = np.empty((nq, k), dtype=np.int64)
        dist = np.empty((nq, k))
        block = max(1, _BLOCK_ELEMS // max(self.size, 1))
        for start in range(0, nq, block):
            stop = min(nq, start + block)
            d2 = self.sq_dist(q_num[start:stop], None if q_cat is None else q_cat[start:stop])
            if exclude is not None:
                ex = np.asarray(exclude[start:stop])
                rows = np.flatnonzero(ex >= 0)
                d2[rows, ex[rows]] = -np.inf if farthest else np.inf
            if farthest:
                cols, vals = _smallest_k(-d2, k)
                vals = -vals
            else:
                cols, vals = _smallest_k(d2, k)
            idx[start:stop] = cols
            dist[start:stop] = np.sqrt(vals)
        return idx, dist


def feature_space(dataset, delta: float | None = None) -> NeighborIndex:
    """Standardize a dataset's numeric columns and pick the categorical penalty.

    Without an explicit ``delta`` the penalty is the median of the per-column
    standard deviations of the (standardized) minority rows, the usual
    SMOTE-NC choice; 1.0 when there are no numeric columns.
    """
    from .core import class_partition

    z, _, _ = standardize(dataset.numeric)
    cat = dataset.categorical if dataset.n_categorical else None
    if cat is not None and delta is None:
        delta = 1.0
        if z.shape[1]:
            minority, _ = class_partition(dataset)
            zm = z[minority]
            mean = np.cumsum(zm, axis=0)[-1] / len(minority)
            c = zm - mean
            std = np.sqrt(np.cumsum(c * c, axis=0)[-1] / len(minority))
            delta = float(statistics.median(std.tolist()))
    return NeighborIndex(z, cat, float(delta or 0.0))


def sub_index(index: NeighborIndex, rows) -> NeighborIndex:
    rows = np.asarray(rows, dtype=np.int64)
    cat = None if index.categorical is None else index.categorical[rows]
    return NeighborIndex(index.points[rows], cat, index.delta)


def knn_query(index: NeighborIndex, query_rows, k: int, *, include_self: bool = False, clamp: bool = True):
    """k nearest neighbors of rows of the index itself (self excluded by default).

    Returns ``(indices, distances)`` with index positions into ``index``.
    With ``clamp`` the effective k shrinks to the available candidate count
    (with a warning); otherwise an oversized k raises ``KTooLarge``.
    """
    rows = np.asarray(query_rows, dtype=np.int64)
    available = index.size - (0 if include_self else 1)
    if clamp:
        k = clamp_k(k, available)
    elif k > available:
        raise KTooLarge(f"k={k} but only {available} candidates")
    cat = None if index.categorical is None else index.categorical[rows]
    exclude = None if include_self else rows
    return index.query(index.points[rows], cat, k, exclude=exclude)


# --------------------------------------------------------------------------
# k-means


@dataclass(eq=False)
class KMeansModel:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_history: list = field(default_factory=list)
    n_iter: int = 0


def _assign(points, centroids):
    d2 = squared_distances(points, None, centroids, None)
    labels = np.argmin(d2, axis=1)
    best = d2[np.arange(len(points)), labels]
    return labels, math.fsum(best.tolist())


def _update(points, labels, centroids):
    k = centroids.shape[0]
    sums = np.zeros_like(centroids)
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k)
    new = centroids.copy()
    nonempty = counts > 0
    new[nonempty] = sums[nonempty] / counts[nonempty, None]
    return new


def lloyd(points: np.ndarray, init: np.ndarray, max_iter: int = 300) -> KMeansModel:
    """Lloyd iterations from given initial centroids until assignments stop changing."""
    centroids = np.array(init, dtype=np.float64)
    labels, inertia = _assign(points, centroids)
    history = [inertia]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        centroids = _update(points, labels, centroids)
        new_labels, inertia = _assign(points, centroids)
        history.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return KMeansModel(centroids, labels, inertia, history, n_iter)


def seed_centroids(points: np.ndarray, k: int, rng: SeededRng) -> np.ndarray:
    """k distinct starting rows by D-squared weighted sampling (k-means++).

    The first row is uniform. Each later row is the first index whose running
    sum of squared distances to the chosen set exceeds ``uniform() * total``;
    when every remaining row sits on a chosen one, the lowest unchosen index
    is taken.
    """
    n = points.shape[0]
    chosen = [rng.randbelow(n)]
    d2 = squared_distances(points, None, points[chosen[0]][None], None)[:, 0]
    for _ in range(1, k):
        cum = np.cumsum(d2)
        total = float(cum[-1])
        if total > 0.0:
            pick = min(int(np.searchsorted(cum, rng.uniform() * total, side="right")), n - 1)
        else:
            taken = np.zeros(n, dtype=bool)
            taken[chosen] = True
            pick = int(np.argmin(taken))
        chosen.append(pick)
        d2 = np.minimum(d2, squared_distances(points, None, points[pick][None], None)[:, 0])
        d2[pick] = 0.0
    return np.array(chosen, dtype=np.int64)


def kmeans_fit(points, k: int, rng: SeededRng | int | None = None, max_iter: int = 300, n_init: int = 10) -> KMeansModel:
    """Best of ``n_init`` Lloyd runs, each started from ``seed_centroids``.

    The run with strictly lowest inertia wins (first on ties).
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1 or k > n:
        raise KTooLarge(f"k={k} with {n} points")
    rng = as_rng(rng)
    best = None
    for _ in range(n_init):
        init = points[seed_centroids(points, k, rng)]
        model = lloyd(points, init, max_iter)
        if best is None or model.inertia < best.inertia:
            best = model
    return best


# --------------------------------------------------------------------------
# linear margin


@dataclass(eq=False)
class LinearMargin:
    weights: np.ndarray
    bias: float
    support_indices: np.ndarray
    objective_history: list = field(default_factory=list)

    def decision(self, points) -> np.ndarray:
        return linear_scores(points, self.weights, self.bias)


def linear_scores(points, weights, bias) -> np.ndarray:
    acc = np.zeros(points.shape[0])
    for j in range(points.shape[1]):
        acc += weights[j] * points[:, j]
    return acc + bias


def hinge_objective(points, labels, weights, bias, reg: float) -> float:
    """reg/2 * |w|^2 + mean hinge loss, labels in {0, 1} mapped to -1/+1."""
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    margins = y * linear_scores(points, weights, bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * reg * float(np.dot(weights, weights)) + float(hinge.mean())


def linear_margin_fit(
    points,
    labels,
    rng: SeededRng | int | None = None,
    *,
    epochs: int = 20,
    reg: float = 1e-3,
    batch_size: int = 64,
) -> LinearMargin:
    """Averaged mini-batch subgradient descent on the L2-regularized hinge loss.

    Label 1 maps to +1. Each epoch shuffles the rows and walks them in
    consecutive batches; step t uses rate 1 / (1 + reg * t). The returned
    weights are the running average of all iterates and the support set is
    every row with y * (w.x + b) <= 1 under those averaged weights.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    if not (np.any(labels == 1) and np.any(labels != 1)):
        raise EmptyClass("linear margin needs both classes")
    rng = as_rng(rng)
    n, d = points.shape
    y = np.where(labels == 1, 1.0, -1.0)
    w = np.zeros(d)
    b = 0.0
    w_avg = np.zeros(d)
    b_avg = 0.0
    t = 0
    history = []
    for _ in range(epochs):
        order = rng.shuffle(np.arange(n))
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            xb = points[batch]
            yb = y[batch]
            viol = yb * linear_scores(xb, w, b) < 1.0
            t += 1
            eta = 1.0 / (1.0 + reg * t)
            size = float(len(batch))
            if viol.any():
                pull = np.cumsum(yb[viol, None] * xb[viol], axis=0)[-1]
                pull_b = float(np.cumsum(yb[viol])[-1])
            else:
                pull = np.zeros(d)
                pull_b = 0.0
            w = w - eta * (reg * w - pull / size)
            b = b + eta * (pull_b / size)
            w_avg = w_avg + (w - w_avg) / t
            b_avg = b_avg + (b - b_avg) / t
        history.append(hinge_objective(points, labels, w_avg, b_avg, reg))
    margins = y * linear_scores(points, w_avg, b_avg)
    support = np.flatnonzero(margins <= 1.0)
    return LinearMargin(w_avg, b_avg, support, history)
