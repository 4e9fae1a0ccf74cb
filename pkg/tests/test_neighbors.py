import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imbresample.core import EmptyClass, KTooLarge, SeededRng
from imbresample.neighbors import (
    KClampWarning,
    NeighborIndex,
    clamp_k,
    hinge_objective,
    kmeans_fit,
    knn_query,
    linear_margin_fit,
    lloyd,
    squared_distances,
)


def brute_knn(points, cat, delta, q, k):
    d2 = []
    for j in range(len(points)):
        if j == q:
            continue
        s = float(np.sum((points[q] - points[j]) ** 2))
        if cat is not None:
            s += delta * delta * int(np.sum(cat[q] != cat[j]))
        d2.append((s, j))
    d2.sort()
    return [j for _, j in d2[:k]]


def test_line_example():
    index = NeighborIndex(np.array([[0.0], [1.0], [10.0]]))
    idx, dist = knn_query(index, [0], 1)
    assert idx.tolist() == [[1]] and dist.tolist() == [[1.0]]


def test_tie_goes_to_lower_index():
    index = NeighborIndex(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    idx, _ = knn_query(index, [0], 1)
    assert idx.tolist() == [[1]]
    index = NeighborIndex(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))
    idx, _ = knn_query(index, [0], 1)
    assert idx.tolist() == [[1]]


@given(st.integers(0, 10_000), st.integers(1, 19), st.booleans(), st.booleans())
def test_knn_matches_brute_force(seed, k, with_cat, rounded):
    r = np.random.default_rng(seed)
    points = r.normal(size=(20, 3))
    if rounded:
        points = np.round(points)
    cat = r.integers(0, 2, size=(20, 2)) if with_cat else None
    delta = 0.7
    index = NeighborIndex(points, cat, delta)
    idx, dist = knn_query(index, np.arange(20), k)
    for q in range(20):
        assert idx[q].tolist() == brute_knn(points, cat, delta, q, k)
    assert np.all(np.diff(dist, axis=1) >= 0)


def test_zero_categorical_columns_equal_euclidean():
    r = np.random.default_rng(1)
    pts = r.normal(size=(15, 4))
    plain = squared_distances(pts, None, pts, None)
    hetero = squared_distances(pts, np.zeros((15, 0), dtype=np.int64), pts, np.zeros((15, 0), dtype=np.int64), 2.0)
    assert plain.tobytes() == hetero.tobytes()


def test_self_included_on_request():
    index = NeighborIndex(np.array([[0.0], [5.0], [6.0]]))
    idx, _ = knn_query(index, [1], 1, include_self=True)
    assert idx.tolist() == [[1]]


def test_k_clamping_and_errors():
    index = NeighborIndex(np.array([[0.0], [1.0], [3.0]]))
    with pytest.warns(KClampWarning):
        idx, _ = knn_query(index, [0], 5)
    assert idx.shape == (1, 2)
    with pytest.raises(KTooLarge):
        knn_query(index, [0], 5, clamp=False)
    with pytest.raises(KTooLarge):
        clamp_k(1, 0)


def test_farthest_query():
    index = NeighborIndex(np.array([[0.0], [1.0], [10.0], [-10.0]]))
    idx, dist = index.query(np.array([[0.0]]), k=2, farthest=True)
    assert idx.tolist() == [[2, 3]] and dist.tolist() == [[10.0, 10.0]]


# ---------------------------------------------------------------- k-means


def test_kmeans_two_pairs():
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    model = kmeans_fit(pts, 2, SeededRng(0))
    got = sorted(map(tuple, model.centroids.tolist()))
    assert got == [(0.0, 0.5), (10.0, 0.5)]


def test_kmeans_k_equals_n():
    pts = np.random.default_rng(2).normal(size=(7, 2))
    model = kmeans_fit(pts, 7, SeededRng(1))
    assert model.inertia == 0.0
    assert sorted(map(tuple, model.centroids.tolist())) == sorted(map(tuple, pts.tolist()))


def test_kmeans_too_many_clusters():
    with pytest.raises(KTooLarge):
        kmeans_fit(np.zeros((3, 1)), 4, SeededRng(0))


@given(st.integers(0, 5000))
def test_lloyd_inertia_non_increasing(seed):
    r = np.random.default_rng(seed)
    pts = r.normal(size=(40, 2))
    model = lloyd(pts, pts[:4])
    hist = model.inertia_history
    assert all(b <= a + 1e-12 * max(1.0, a) for a, b in zip(hist, hist[1:]))


def _best_of_restarts(pts, k, restarts, seed):
    r = np.random.default_rng(seed)
    best = np.inf
    for _ in range(restarts):
        cents = pts[r.choice(len(pts), k, replace=False)]
        for _ in range(100):
            lab = np.argmin(((pts[:, None, :] - cents[None]) ** 2).sum(-1), axis=1)
            new = np.array([pts[lab == c].mean(0) if np.any(lab == c) else cents[c] for c in range(k)])
            if np.allclose(new, cents):
                break
            cents = new
        best = min(best, ((pts - cents[lab]) ** 2).sum())
    return best


def test_kmeans_near_restart_oracle():
    r = np.random.default_rng(5)
    pts = np.vstack([r.normal(c, 0.6, size=(10, 2)) for c in ((0, 0), (4, 0), (0, 4))])
    model = kmeans_fit(pts, 3, SeededRng(3))
    assert model.inertia <= 1.05 * _best_of_restarts(pts, 3, 100, 0)


# ---------------------------------------------------------------- linear margin


def test_margin_separable():
    r = np.random.default_rng(0)
    pts = np.vstack([r.normal((5, 0), 0.5, size=(30, 2)), r.normal((-5, 0), 0.5, size=(30, 2))])
    labels = np.r_[np.ones(30), np.zeros(30)]
    model = linear_margin_fit(pts, labels, SeededRng(0))
    pred = (model.decision(pts) > 0).astype(int)
    assert np.all(pred == labels)


def test_margin_single_class():
    with pytest.raises(EmptyClass):
        linear_margin_fit(np.zeros((5, 2)), np.ones(5), SeededRng(0))


def test_margin_objective_near_grid_oracle():
    r = np.random.default_rng(3)
    pts = np.vstack([r.normal((1, 0), 1.0, size=(50, 2)), r.normal((-1, 0), 1.0, size=(50, 2))])
    labels = np.r_[np.ones(50), np.zeros(50)]
    model = linear_margin_fit(pts, labels, SeededRng(0))
    ours = hinge_objective(pts, labels, model.weights, model.bias, 1e-3)
    grid = np.linspace(-3, 3, 61)
    best = min(
        hinge_objective(pts, labels, np.array([w0, w1]), b, 1e-3)
        for w0, w1, b in itertools.product(grid, grid, np.linspace(-1, 1, 11))
    )
    assert ours <= 1.10 * best


def test_support_set_is_margin_violators():
    r = np.random.default_rng(8)
    pts = r.normal(size=(80, 3))
    labels = (pts[:, 0] + 0.5 * r.normal(size=80) > 0).astype(int)
    model = linear_margin_fit(pts, labels, SeededRng(2))
    y = np.where(labels == 1, 1.0, -1.0)
    assert model.support_indices.tolist() == np.flatnonzero(y * model.decision(pts) <= 1.0).tolist()
