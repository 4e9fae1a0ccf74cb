"""Majority-class reduction methods.

Every function takes a :class:`~imbresample.core.Dataset` and returns a
:class:`~imbresample.core.ResampleOutput`. Minority rows are never removed.
Methods with a ratio knob (random, cluster centroids, NearMiss, instance
hardness) honour a :class:`SamplingStrategy`; the cleaning rules (CNN, Tomek,
OSS, ENN family, NCR) have none and ignore it.

Neighbor computations run on standardized numeric features (plus a
categorical mismatch penalty when categorical columns exist), and each pass
uses a snapshot of the data taken before the pass, so removals within a pass
are simultaneous.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    CategoricalUnsupported,
    Dataset,
    ResampleOutput,
    SamplingStrategy,
    SeededRng,
    as_rng,
    class_partition,
    resolve_counts,
    standardize,
)
from .neighbors import NeighborIndex, clamp_k, feature_space, kmeans_fit, knn_query, sub_index

NEAR_MISS_VERSIONS = (1, 2, 3)
ENN_VARIANTS = ("ENN", "RENN", "AllKNN")
ENN_CRITERIA = ("all", "mode")
TOMEK_SCOPES = ("majority", "both")
CLEAN_CLASSES = ("majority", "all")

# (train, test, rng) -> P(label == 1) for each test row
Scorer = Callable[[Dataset, Dataset, SeededRng], np.ndarray]


@dataclass(frozen=True)
class UndersampleConfig:
    strategy: SamplingStrategy = SamplingStrategy()
    k: int = 3
    near_miss_version: int = 1
    near_miss_m: int = 3
    enn_criterion: str = "mode"
    tomek_scope: str = "majority"

    def __post_init__(self):
        if self.near_miss_version not in NEAR_MISS_VERSIONS:
            raise ValueError(f"near_miss_version must be one of {NEAR_MISS_VERSIONS}")
        if self.enn_criterion not in ENN_CRITERIA:
            raise ValueError(f"enn_criterion must be one of {ENN_CRITERIA}")
        if self.tomek_scope not in TOMEK_SCOPES:
            raise ValueError(f"tomek_scope must be one of {TOMEK_SCOPES}")
        if self.k < 1:
            raise ValueError("k must be >= 1")


def _check_choice(value, allowed, name):
    if value not in allowed:
        raise ValueError(f"{name} must be one of {allowed}, got {value!r}")


def random_under(dataset: Dataset, strategy: SamplingStrategy | float = 0.1, rng=None) -> ResampleOutput:
    """Keep a uniform random subset of floor(N_min / ratio) majority rows."""
    minority, majority = class_partition(dataset)
    target = resolve_counts(strategy, len(minority), len(majority), "under")
    chosen = majority[as_rng(rng).sample(len(majority), target)]
    return ResampleOutput.keep_only(dataset, np.concatenate([minority, chosen]))


def cluster_centroids(
    dataset: Dataset,
    strategy: SamplingStrategy | float = 0.1,
    rng=None,
    *,
    max_iter: int = 300,
    n_init: int = 30,
) -> ResampleOutput:
    """Replace the majority class by the centroids of a K-means fit on it.

    K is floor(N_min / ratio). Clustering runs in standardized space; each
    emitted centroid is the raw-unit mean of its members. The centroid rows
    carry the majority label (the only synthetic rows in this module that
    are not minority).
    """
    if dataset.n_categorical:
        raise CategoricalUnsupported("cluster centroids needs numeric-only features")
    minority, majority = class_partition(dataset)
    target = resolve_counts(strategy, len(minority), len(majority), "under")
    z, mean, std = standardize(dataset.numeric)
    model = kmeans_fit(z[majority], target, rng, max_iter=max_iter, n_init=n_init)
    raw = dataset.numeric[majority]
    sums = np.zeros((target, dataset.n_numeric))
    np.add.at(sums, model.assignments, raw)
    counts = np.bincount(model.assignments, minlength=target)
    centroids = model.centroids * std + mean
    nonempty = counts > 0
    centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
    none = np.full(target, -1, dtype=np.int64)
    return ResampleOutput(
        np.sort(minority),
        centroids,
        np.empty((target, 0), dtype=np.int64),
        np.full(target, dataset.labels[majority[0]], dtype=np.int64),
        none,
        none.copy(),
        np.zeros(target),
        {"inertia": model.inertia, "n_iter": model.n_iter},
    )


def _near_miss_scores(index: NeighborIndex, rows, minority, k: int, farthest: bool) -> np.ndarray:
    ref = sub_index(index, minority)
    k = clamp_k(k, len(minority), what="minority rows")
    cat = None if index.categorical is None else index.categorical[rows]
    _, dist = ref.query(index.points[rows], cat, k, farthest=farthest)
    return np.cumsum(dist, axis=1)[:, -1] / k


def near_miss(
    dataset: Dataset,
    strategy: SamplingStrategy | float = 0.1,
    version: int = 1,
    k: int = 3,
    m: int = 3,
) -> ResampleOutput:
    """NearMiss selection of floor(N_min / ratio) majority rows.

    Version 1 keeps the rows whose mean distance to their k nearest minority
    rows is smallest. Version 2 scores each row by the mean distance to its k
    farthest minority rows and keeps the largest scores (the rows farthest
    from the minority class). Version 3 first restricts the majority class to
    the union of the m nearest majority rows of every minority row, then
    applies the version-2 rule; if that union is smaller than the target, all
    of it is kept.
    """
    _check_choice(version, NEAR_MISS_VERSIONS, "version")
    minority, majority = class_partition(dataset)
    target = resolve_counts(strategy, len(minority), len(majority), "under")
    index = feature_space(dataset)
    candidates = majority
    info = {}
    if version == 3:
        m_eff = clamp_k(m, len(majority), what="majority rows")
        ref = sub_index(index, majority)
        cat = None if index.categorical is None else index.categorical[minority]
        nn, _ = ref.query(index.points[minority], cat, m_eff)
        candidates = majority[np.unique(nn)]
        info["reduced_majority"] = len(candidates)
    if version == 1:
        scores = _near_miss_scores(index, candidates, minority, k, farthest=False)
        order = np.argsort(scores, kind="stable")
    else:
        scores = _near_miss_scores(index, candidates, minority, k, farthest=True)
        order = np.argsort(-scores, kind="stable")
    chosen = candidates[order[:target]]
    return ResampleOutput.keep_only(dataset, np.concatenate([minority, chosen]), info)


# --------------------------------------------------------------------------
# condensation


def _condense(index: NeighborIndex, labels, active, keep_label: int, rng: SeededRng, repeat: bool) -> np.ndarray:
    """Hart's condensed nearest neighbor on the ``active`` rows.

    The store starts with every active row of ``keep_label`` plus one random
    active row of the other class; the remaining rows are scanned in a
    random order (fixed across passes) and added when the 1-NN rule over the
    current store misclassifies them.
    """
    active = np.asarray(active, dtype=np.int64)
    act_labels = labels[active]
    base = active[act_labels == keep_label]
    pool = active[act_labels != keep_label]
    if len(pool) == 0:
        return np.sort(base)
    seed_row = pool[rng.randbelow(len(pool))]
    rest = pool[pool != seed_row]
    order = rng.shuffle(rest)
    store = np.sort(np.concatenate([base, [seed_row]]))
    n = len(order)
    if n == 0:
        return store
    best_d2 = np.full(n, np.inf)
    best_idx = np.full(n, np.iinfo(np.int64).max)
    block = max(1, (1 << 22) // max(n, 1))
    for start in range(0, len(store), block):
        chunk = store[start : start + block]
        d2 = _sq(index, order, chunk)
        pos = np.argmin(d2, axis=1)
        vals = d2[np.arange(n), pos]
        cand = chunk[pos]
        better = (vals < best_d2) | ((vals == best_d2) & (cand < best_idx))
        best_d2[better] = vals[better]
        best_idx[better] = cand[better]
    in_store = np.zeros(n, dtype=bool)
    order_labels = labels[order]
    added_rows = []
    passes = 0
    while True:
        passes += 1
        added = False
        for i in range(n):
            if in_store[i] or labels[best_idx[i]] == order_labels[i]:
                continue
            in_store[i] = True
            added = True
            row = order[i]
            added_rows.append(row)
            d2 = _sq(index, order, [row])[:, 0]
            better = (d2 < best_d2) | ((d2 == best_d2) & (row < best_idx))
            best_d2[better] = d2[better]
            best_idx[better] = row
        if not (added and repeat):
            break
    return np.sort(np.concatenate([store, np.asarray(added_rows, dtype=np.int64)]))


def _sq(index: NeighborIndex, rows_a, rows_b) -> np.ndarray:
    rows_a = np.asarray(rows_a, dtype=np.int64)
    rows_b = np.asarray(rows_b, dtype=np.int64)
    cat = index.categorical
    return NeighborIndex(
        index.points[rows_b], None if cat is None else cat[rows_b], index.delta
    ).sq_dist(index.points[rows_a], None if cat is None else cat[rows_a])


def condensed_nn(dataset: Dataset, rng=None) -> ResampleOutput:
    """Condensed nearest neighbor, repeated until a full scan adds nothing."""
    minority, majority = class_partition(dataset)
    index = feature_space(dataset)
    label = int(dataset.labels[minority[0]])
    kept = _condense(index, dataset.labels, np.arange(dataset.n_rows), label, as_rng(rng), repeat=True)
    return ResampleOutput.keep_only(dataset, kept)


# --------------------------------------------------------------------------
# Tomek links


def _tomek_linked(index: NeighborIndex, labels) -> np.ndarray:
    """Boolean mask of rows that belong to a cross-class mutual 1-NN pair."""
    n = index.size
    if n < 2:
        return np.zeros(n, dtype=bool)
    nn, _ = knn_query(index, np.arange(n), 1, clamp=False)
    nn = nn[:, 0]
    return (nn[nn] == np.arange(n)) & (labels[nn] != labels)


def _tomek_keep(index: NeighborIndex, labels, minority_label: int, scope: str) -> np.ndarray:
    linked = _tomek_linked(index, labels)
    if scope == "majority":
        linked &= labels != minority_label
    return np.flatnonzero(~linked)


def tomek_links(dataset: Dataset, scope: str = "majority") -> ResampleOutput:
    """Remove Tomek-link members: majority side only, or both sides with ``scope='both'``."""
    _check_choice(scope, TOMEK_SCOPES, "scope")
    minority, _ = class_partition(dataset)
    index = feature_space(dataset)
    kept = _tomek_keep(index, dataset.labels, int(dataset.labels[minority[0]]), scope)
    return ResampleOutput.keep_only(dataset, kept)


def one_sided_selection(dataset: Dataset, rng=None) -> ResampleOutput:
    """Majority-side Tomek removal followed by a single condensation scan."""
    minority, _ = class_partition(dataset)
    label = int(dataset.labels[minority[0]])
    index = feature_space(dataset)
    after_tomek = _tomek_keep(index, dataset.labels, label, "majority")
    kept = _condense(index, dataset.labels, after_tomek, label, as_rng(rng), repeat=False)
    return ResampleOutput.keep_only(dataset, kept)


# --------------------------------------------------------------------------
# edited nearest neighbors


def _enn_pass(index: NeighborIndex, labels, active, k: int, criterion: str, removable_label) -> np.ndarray:
    """One simultaneous ENN pass over ``active``; returns the surviving rows.

    ``removable_label`` None means every class may be edited.
    """
    if len(active) < 2:
        return active
    sub = sub_index(index, active)
    k_eff = clamp_k(k, len(active) - 1)
    nn, _ = knn_query(sub, np.arange(len(active)), k_eff)
    own = labels[active]
    same = (labels[active][nn] == own[:, None]).sum(axis=1)
    if criterion == "all":
        ok = same == k_eff
    else:
        ok = 2 * same > k_eff
    if removable_label is not None:
        ok |= own != removable_label
    return active[ok]


def _enn_family(index, labels, variant, criterion, k, max_iter, removable_label):
    active = np.arange(index.size)
    n_iter = 0
    if variant == "ENN":
        active = _enn_pass(index, labels, active, k, criterion, removable_label)
        n_iter = 1
    elif variant == "RENN":
        while n_iter < max_iter:
            n_iter += 1
            survivors = _enn_pass(index, labels, active, k, criterion, removable_label)
            done = len(survivors) == len(active)
            active = survivors
            if done:
                break
    else:
        for kk in range(1, k + 1):
            n_iter += 1
            active = _enn_pass(index, labels, active, kk, criterion, removable_label)
    return active, n_iter


def enn_family(
    dataset: Dataset,
    variant: str = "ENN",
    criterion: str = "mode",
    k: int = 3,
    *,
    max_iter: int = 100,
    clean: str = "majority",
) -> ResampleOutput:
    """Edited nearest neighbors and its repeated (RENN) and growing-k (AllKNN) forms.

    A row survives a pass when its k nearest neighbors (among the rows alive
    at the start of the pass) agree with its label: all of them for
    ``criterion='all'``, a strict majority for ``'mode'``. RENN repeats until
    a pass removes nothing or ``max_iter`` passes ran; AllKNN runs passes with
    k = 1..k. ``clean='all'`` lets the minority class be edited too (used by
    the combined methods). ``info['n_iter']`` counts executed passes.
    """
    _check_choice(variant, ENN_VARIANTS, "variant")
    _check_choice(criterion, ENN_CRITERIA, "criterion")
    _check_choice(clean, CLEAN_CLASSES, "clean")
    if k < 1:
        raise ValueError("k must be >= 1")
    _, majority = class_partition(dataset)
    index = feature_space(dataset)
    removable = int(dataset.labels[majority[0]]) if clean == "majority" else None
    kept, n_iter = _enn_family(index, dataset.labels, variant, criterion, k, max_iter, removable)
    return ResampleOutput.keep_only(dataset, kept, {"n_iter": n_iter})


def neighborhood_cleaning(dataset: Dataset, k: int = 3) -> ResampleOutput:
    """Neighborhood cleaning rule.

    Removes the union of (a) majority rows edited away by one ENN pass with
    the mode criterion and (b) majority rows among the k nearest neighbors of
    any minority row whose k-NN vote (strict majority) misclassifies it. Both
    steps look at the original data.
    """
    minority, majority = class_partition(dataset)
    labels = dataset.labels
    maj_label = int(labels[majority[0]])
    index = feature_space(dataset)
    all_rows = np.arange(dataset.n_rows)
    survivors = _enn_pass(index, labels, all_rows, k, "mode", maj_label)
    removed = np.ones(dataset.n_rows, dtype=bool)
    removed[survivors] = False
    k_eff = clamp_k(k, dataset.n_rows - 1)
    nn, _ = knn_query(index, minority, k_eff)
    votes = (labels[nn] == maj_label).sum(axis=1)
    misclassified = 2 * votes > k_eff
    culprits = nn[misclassified]
    culprits = culprits[labels[culprits] == maj_label]
    removed[culprits] = True
    return ResampleOutput.keep_only(dataset, all_rows[~removed])


# --------------------------------------------------------------------------
# instance hardness


def stratified_folds(labels, folds: int, rng: SeededRng) -> np.ndarray:
    """Fold id per row: each class (label 0 first) is shuffled and dealt round-robin."""
    fold = np.empty(len(labels), dtype=np.int64)
    for value in (0, 1):
        rows = rng.shuffle(np.flatnonzero(labels == value))
        fold[rows] = np.arange(len(rows)) % folds
    return fold


def out_of_fold_scores(dataset: Dataset, scorer: Scorer, folds: int, rng: SeededRng) -> np.ndarray:
    """P(label == 1) for every row, each predicted by a model that never saw it."""
    fold = stratified_folds(dataset.labels, folds, rng)
    proba = np.empty(dataset.n_rows)
    for f in range(folds):
        test = np.flatnonzero(fold == f)
        if len(test) == 0:
            continue
        train = np.flatnonzero(fold != f)
        proba[test] = scorer(dataset.take(train), dataset.take(test), rng.derive(f))
    return proba


def instance_hardness_threshold(
    dataset: Dataset,
    strategy: SamplingStrategy | float = 0.1,
    scorer: Scorer | None = None,
    folds: int = 3,
    rng=None,
) -> ResampleOutput:
    """Keep the floor(N_min / ratio) majority rows that are easiest to classify.

    Hardness comes from out-of-fold probabilities of each row's own class
    (stratified ``folds``); the default scorer is the package's boosted-tree
    model on ordered-target-encoded features. Ties keep the lower row index.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if scorer is None:
        from .boosting import gbdt_scorer

        scorer = gbdt_scorer
    minority, majority = class_partition(dataset)
    target = resolve_counts(strategy, len(minority), len(majority), "under")
    proba = out_of_fold_scores(dataset, scorer, folds, as_rng(rng))
    own = proba if dataset.labels[majority[0]] == 1 else 1.0 - proba
    order = np.argsort(-own[majority], kind="stable")
    chosen = majority[order[:target]]
    return ResampleOutput.keep_only(dataset, np.concatenate([minority, chosen]), {"oof_proba": proba})
