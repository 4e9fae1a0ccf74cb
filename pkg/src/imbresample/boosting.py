"""Residual-fitting gradient boosted regression trees and ordered target statistics.

Boosting uses the squared error on 0/1 labels: stage i fits a regression tree
to the residuals y - F_{i-1}(x), which is the negative gradient of
(y - F)^2 up to a factor of 2. Scores are pseudo-probabilities; they are
clipped to [0, 1] only when a probability is requested.

Split search works on per-feature bins (at most ``max_bins`` thresholds taken
from training values), so a split "bin <= b" is exactly "x <= threshold".
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .core import CategoricalUnsupported, Dataset, SchemaMismatch, SeededRng, as_rng

FORMAT_NAME = "imbresample-gbdt"
FORMAT_VERSION = 1


# --------------------------------------------------------------------------
# ordered target statistics


@dataclass(eq=False)
class OrderedTargetEncoder:
    """Per categorical column: final (count, label sum) per code, plus the prior."""

    prior: float
    smoothing: float
    counts: list
    sums: list
    permutation: np.ndarray
    columns: tuple = ()

    def transform(self, dataset: Dataset) -> Dataset:
        """Inference encoding with the full training statistics."""
        if dataset.categorical_names != self.columns:
            raise SchemaMismatch("categorical columns differ from the fitted encoder")
        a, p = self.smoothing, self.prior
        encoded = np.empty((dataset.n_rows, len(self.columns)))
        for j in range(len(self.columns)):
            codes = dataset.categorical[:, j]
            counts = _pad(self.counts[j], codes)
            sums = _pad(self.sums[j], codes)
            encoded[:, j] = (sums[codes] + a * p) / (counts[codes] + a)
        return _numeric_view(dataset, encoded)

    def same_as(self, other: "OrderedTargetEncoder") -> bool:
        return (
            self.prior == other.prior
            and self.smoothing == other.smoothing
            and np.array_equal(self.permutation, other.permutation)
            and all(np.array_equal(a, b) for a, b in zip(self.counts, other.counts))
            and all(np.array_equal(a, b) for a, b in zip(self.sums, other.sums))
        )


def _pad(arr, codes):
    need = int(codes.max()) + 1 if len(codes) else 0
    if need <= len(arr):
        return arr
    return np.concatenate([arr, np.zeros(need - len(arr), dtype=arr.dtype)])


def _numeric_view(dataset: Dataset, encoded: np.ndarray) -> Dataset:
    return Dataset(
        np.hstack([dataset.numeric, encoded]),
        np.empty((dataset.n_rows, 0), dtype=np.int64),
        dataset.labels,
        dataset.numeric_names + dataset.categorical_names,
        (),
        (),
        dataset.label_name,
    )


def ordered_encode(
    dataset: Dataset, rng=None, smoothing: float = 1.0, prior: float | None = None
) -> tuple[Dataset, OrderedTargetEncoder]:
    """Replace categorical columns by ordered target statistics.

    Rows are visited in a random permutation; a row's value is
    (label_sum_before + a * p) / (count_before + a) over earlier rows with the
    same code, where p is the training minority (label 1) rate unless
    ``prior`` fixes it. Encoded columns are appended after the numeric ones,
    keeping their names.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be > 0")
    n = dataset.n_rows
    perm = as_rng(rng).shuffle(np.arange(n))
    labels = dataset.labels
    if prior is None:
        prior = float(labels.mean()) if n else 0.0
    a = float(smoothing)
    encoded = np.empty((n, dataset.n_categorical))
    counts, sums = [], []
    y_perm = labels[perm]
    for j in range(dataset.n_categorical):
        codes_perm = dataset.categorical[perm, j]
        order = np.argsort(codes_perm, kind="stable")
        sc = codes_perm[order]
        sy = y_perm[order]
        starts = np.r_[0, np.flatnonzero(np.diff(sc)) + 1] if n else np.empty(0, dtype=np.int64)
        group_start = np.repeat(starts, np.diff(np.r_[starts, n]))
        csum = np.cumsum(sy) - sy
        sum_before = csum - csum[group_start]
        count_before = np.arange(n) - group_start
        values = (sum_before + a * prior) / (count_before + a)
        col = np.empty(n)
        col[perm[order]] = values
        encoded[:, j] = col
        card = len(dataset.categories[j])
        counts.append(np.bincount(dataset.categorical[:, j], minlength=card).astype(np.int64))
        sums.append(np.bincount(dataset.categorical[:, j], weights=labels, minlength=card).astype(np.int64))
    encoder = OrderedTargetEncoder(prior, a, counts, sums, perm, dataset.categorical_names)
    return _numeric_view(dataset, encoded), encoder


# --------------------------------------------------------------------------
# trees


@dataclass(eq=False)
class RegressionTree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def depth(self) -> int:
        depth = np.zeros(len(self.feature), dtype=np.int64)
        for node in range(len(self.feature)):
            if self.feature[node] >= 0:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def leaf_of(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        for _ in range(self.depth):
            f = self.feature[node]
            idx = np.flatnonzero(f >= 0)
            if len(idx) == 0:
                break
            nd = node[idx]
            go_left = X[idx, f[idx]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.leaf_of(X)]


def bin_edges(column: np.ndarray, max_bins: int) -> np.ndarray:
    """Split thresholds for one feature: training values, at most max_bins - 1 of them."""
    uniq = np.unique(column)
    if len(uniq) <= max_bins:
        return uniq[:-1]
    qs = np.linspace(0.0, 1.0, max_bins + 1)[1:-1]
    edges = np.unique(np.quantile(column, qs, method="lower"))
    return edges[edges < uniq[-1]]


def bin_features(X: np.ndarray, edges: list) -> np.ndarray:
    return np.column_stack(
        [np.searchsorted(e, X[:, j], side="left") for j, e in enumerate(edges)]
    ).astype(np.int64) if X.shape[1] else np.zeros((X.shape[0], 0), dtype=np.int64)


@njit(cache=True)
def _histograms(bins, rows, row_local, res, n_front, n_bins):
    """Per frontier node, feature and bin: residual sums and row counts (row order)."""
    p = bins.shape[1]
    sums = np.zeros((n_front, p, n_bins))
    counts = np.zeros((n_front, p, n_bins), dtype=np.int64)
    for i in range(rows.shape[0]):
        li = row_local[i]
        if li < 0:
            continue
        r = res[i]
        row = rows[i]
        for j in range(p):
            b = bins[row, j]
            sums[li, j, b] += r
            counts[li, j, b] += 1
    return sums, counts


@njit(cache=True)
def _route(bins, rows, node_of, row_local, split_feature, split_bin, child_left):
    for i in range(rows.shape[0]):
        li = row_local[i]
        if li < 0 or split_feature[li] < 0:
            continue
        if bins[rows[i], split_feature[li]] <= split_bin[li]:
            node_of[i] = child_left[li]
        else:
            node_of[i] = child_left[li] + 1


def grow_tree(
    bins: np.ndarray,
    edges: list,
    residual: np.ndarray,
    rows: np.ndarray,
    max_depth: int,
    min_samples_leaf: int,
    n_bins: int,
) -> tuple[RegressionTree, np.ndarray]:
    """Level-wise least-squares tree on binned features.

    A node splits on the (feature, bin) maximizing
    S_L^2/N_L + S_R^2/N_R - S^2/N subject to both children holding at least
    ``min_samples_leaf`` rows; ties go to the lower feature, then lower bin.
    Leaves hold the mean residual. Returns the tree and the leaf of every
    row in ``rows``.
    """
    p = bins.shape[1]
    feature, threshold, left, right, value = [-1], [0.0], [-1], [-1], [0.0]
    node_of = np.zeros(len(rows), dtype=np.int64)
    res = residual[rows]
    total = float(np.sum(res))
    value[0] = total / len(rows) if len(rows) else 0.0
    frontier = [0]
    stride = p * n_bins
    for _ in range(max_depth):
        if not frontier or p == 0:
            break
        local = np.full(len(feature), -1, dtype=np.int64)
        local[frontier] = np.arange(len(frontier))
        row_local = local[node_of]
        s_hist, n_hist = _histograms(bins, rows, row_local, res, len(frontier), n_bins)
        s_left = np.cumsum(s_hist, axis=2)
        n_left = np.cumsum(n_hist, axis=2)
        s_tot = s_left[:, :1, -1:]
        n_tot = n_left[:, :1, -1:]
        s_right = s_tot - s_left
        n_right = n_tot - n_left
        valid = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = s_left**2 / n_left + s_right**2 / n_right - s_tot**2 / n_tot
        gain = np.where(valid, gain, -np.inf).reshape(len(frontier), stride)
        best = np.argmax(gain, axis=1)
        best_gain = gain[np.arange(len(frontier)), best]
        next_frontier = []
        split_feature = np.full(len(frontier), -1, dtype=np.int64)
        split_bin = np.zeros(len(frontier), dtype=np.int64)
        child_left = np.zeros(len(frontier), dtype=np.int64)
        for li, node in enumerate(frontier):
            if not (best_gain[li] > 1e-12):
                continue
            f, b = divmod(int(best[li]), n_bins)
            sl = float(s_left[li, f, b])
            nl = int(n_left[li, f, b])
            sr = float(s_right[li, f, b])
            nr = int(n_right[li, f, b])
            lid = len(feature)
            feature[node], threshold[node] = f, float(edges[f][b])
            left[node], right[node] = lid, lid + 1
            feature += [-1, -1]
            threshold += [0.0, 0.0]
            left += [-1, -1]
            right += [-1, -1]
            value += [sl / nl, sr / nr]
            split_feature[li], split_bin[li], child_left[li] = f, b, lid
            next_frontier += [lid, lid + 1]
        _route(bins, rows, node_of, row_local, split_feature, split_bin, child_left)
        frontier = next_frontier
    tree = RegressionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )
    return tree, node_of


@dataclass(eq=False)
class GbdtModel:
    trees: list
    learning_rate: float
    base_score: float
    max_depth: int
    min_samples_leaf: int
    feature_names: tuple = ()
    mse_history: list = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def score(self, X) -> np.ndarray:
        return gbdt_score(self, X)

    def predict_proba(self, X) -> np.ndarray:
        return np.clip(gbdt_score(self, X), 0.0, 1.0)

    def same_as(self, other: "GbdtModel") -> bool:
        return to_json(self) == to_json(other)


def _features(data, what="rows") -> tuple[np.ndarray, tuple]:
    if isinstance(data, Dataset):
        if data.n_categorical:
            raise CategoricalUnsupported(f"{what} must be numeric-only; encode categoricals first")
        return data.numeric, data.numeric_names
    X = np.asarray(data, dtype=np.float64)
    return X, tuple(f"x{j}" for j in range(X.shape[1]))


def gbdt_fit(
    train,
    labels=None,
    *,
    m: int = 200,
    learning_rate: float = 0.1,
    max_depth: int = 6,
    min_samples_leaf: int = 20,
    max_bins: int = 255,
    subsample: float = 1.0,
    rng=None,
) -> GbdtModel:
    """Fit ``m`` residual trees. ``train`` is a numeric-only Dataset or an array.

    ``subsample < 1`` grows each tree on a random row subset drawn from
    ``rng``; with the default 1.0 the fit is deterministic and training MSE
    never increases from one stage to the next.
    """
    X, names = _features(train, "training data")
    y = (train.labels if labels is None else np.asarray(labels)).astype(np.float64)
    if m < 0:
        raise ValueError("m must be >= 0")
    if not (0 < learning_rate <= 1):
        raise ValueError("learning_rate must be in (0, 1]")
    if not (0 < subsample <= 1):
        raise ValueError("subsample must be in (0, 1]")
    min_samples_leaf = max(1, int(min_samples_leaf))
    n = len(y)
    base = float(y.mean()) if n else 0.0
    edges = [bin_edges(X[:, j], max_bins) for j in range(X.shape[1])]
    bins = bin_features(X, edges)
    n_bins = max([len(e) + 1 for e in edges], default=1)
    F = np.full(n, base)
    diff = y - F
    history = [float(np.mean(diff * diff)) if n else 0.0]
    rng = as_rng(rng) if subsample < 1 else None
    trees = []
    all_rows = np.arange(n)
    for _ in range(m):
        residual = y - F
        rows = all_rows if rng is None else np.sort(rng.sample(n, max(1, int(round(subsample * n)))))
        tree, leaf = grow_tree(bins, edges, residual, rows, max_depth, min_samples_leaf, n_bins)
        if rng is None:
            F = F + learning_rate * tree.value[leaf]
        else:
            F = F + learning_rate * tree.predict(X)
        trees.append(tree)
        diff = y - F
        history.append(float(np.mean(diff * diff)))
    return GbdtModel(trees, float(learning_rate), base, max_depth, min_samples_leaf, names, history)


def gbdt_score(model: GbdtModel, rows) -> np.ndarray:
    """base_score + learning_rate * sum of tree outputs (unclipped)."""
    X, _ = _features(rows)
    if isinstance(rows, Dataset) and model.feature_names and rows.numeric_names != model.feature_names:
        raise SchemaMismatch("feature names differ from the trained model")
    if X.shape[1] != model.n_features:
        raise SchemaMismatch(f"expected {model.n_features} features, got {X.shape[1]}")
    total = np.zeros(X.shape[0])
    for tree in model.trees:
        total += tree.predict(X)
    return model.base_score + model.learning_rate * total


# --------------------------------------------------------------------------
# persistence


def to_json(model: GbdtModel) -> str:
    """Versioned text format; floats are stored as ``float.hex`` strings."""
    hx = float.hex
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "learning_rate": hx(model.learning_rate),
        "base_score": hx(model.base_score),
        "max_depth": model.max_depth,
        "min_samples_leaf": model.min_samples_leaf,
        "feature_names": list(model.feature_names),
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": [hx(v) for v in t.threshold.tolist()],
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": [hx(v) for v in t.value.tolist()],
            }
            for t in model.trees
        ],
    }
    return json.dumps(doc, indent=1)


def from_json(text: str) -> GbdtModel:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_NAME:
        raise SchemaMismatch("not a boosted-tree model file")
    if doc.get("version") != FORMAT_VERSION:
        raise SchemaMismatch(f"unsupported model format version {doc.get('version')}")
    fh = float.fromhex
    trees = [
        RegressionTree(
            np.array(t["feature"], dtype=np.int64),
            np.array([fh(v) for v in t["threshold"]]),
            np.array(t["left"], dtype=np.int64),
            np.array(t["right"], dtype=np.int64),
            np.array([fh(v) for v in t["value"]]),
        )
        for t in doc["trees"]
    ]
    return GbdtModel(
        trees,
        fh(doc["learning_rate"]),
        fh(doc["base_score"]),
        doc["max_depth"],
        doc["min_samples_leaf"],
        tuple(doc["feature_names"]),
    )


def save_model(model: GbdtModel, path: str | Path) -> None:
    Path(path).write_text(to_json(model))


def load_model(path: str | Path) -> GbdtModel:
    return from_json(Path(path).read_text())


# --------------------------------------------------------------------------
# scorer used by instance hardness


def gbdt_scorer(train: Dataset, test: Dataset, rng: SeededRng, **params) -> np.ndarray:
    """Encode, fit a small boosted model on ``train``, return P(label 1) for ``test``."""
    params = {"m": 50, "max_depth": 3, "min_samples_leaf": 5, **params}
    rng = as_rng(rng)
    if train.n_categorical:
        enc_train, encoder = ordered_encode(train, rng.derive(0))
        enc_test = encoder.transform(test)
    else:
        enc_train, enc_test = train, test
    model = gbdt_fit(enc_train, **params)
    return model.predict_proba(enc_test)
