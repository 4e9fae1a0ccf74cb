import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imbresample.boosting import (
    from_json,
    gbdt_fit,
    gbdt_score,
    load_model,
    ordered_encode,
    save_model,
    to_json,
)
from imbresample.core import CategoricalUnsupported, SchemaMismatch, SeededRng

from _data import make, random_dataset

# ---------------------------------------------------------------- encoder


def test_first_occurrence_gets_prior():
    ds = make(np.zeros(4), [1, 0, 0, 1], categorical=[[0], [1], [2], [3]])
    enc, _ = ordered_encode(ds, SeededRng(0))
    assert enc.numeric[:, 1].tolist() == [0.5] * 4


def identity_perm_rng(n):
    """An rng whose shuffle of arange(n) is the identity."""
    for seed in range(10_000):
        if SeededRng(seed).shuffle(np.arange(n)).tolist() == list(range(n)):
            return seed
    raise AssertionError("no identity permutation found")


def test_one_prior_occurrence():
    seed = identity_perm_rng(2)
    ds = make(np.zeros(2), [1, 0], categorical=[[0], [0]])
    enc, _ = ordered_encode(ds, SeededRng(seed), smoothing=1.0)
    assert enc.numeric[:, 1].tolist() == [0.5, 0.75]


def test_identity_permutation_three_rows():
    seed = identity_perm_rng(3)
    ds = make(np.zeros(3), [1, 0, 1], categorical=[[0], [0], [0]])
    a = 2.0
    enc, encoder = ordered_encode(ds, SeededRng(seed), smoothing=a)
    p = 2 / 3
    assert encoder.prior == p
    assert enc.numeric[:, 1].tolist() == [p, (1 + a * p) / (1 + a), (1 + a * p) / (2 + a)]


@given(st.integers(0, 10_000), st.integers(0, 59))
@settings(max_examples=30)
def test_encoder_leakage(seed, t_pos):
    ds = random_dataset(seed, n=60, q=2)
    _, encoder = ordered_encode(ds, SeededRng(seed), prior=0.1)
    perm = encoder.permutation
    flipped = ds.labels.copy()
    flipped[perm[t_pos]] ^= 1
    ds2 = make(ds.numeric, flipped, ds.categorical, [3, 3])
    a, _ = ordered_encode(ds, SeededRng(seed), prior=0.1)
    b, _ = ordered_encode(ds2, SeededRng(seed), prior=0.1)
    upto = perm[: t_pos + 1]
    assert a.numeric[upto].tobytes() == b.numeric[upto].tobytes()


def test_transform_uses_final_statistics():
    ds = make(np.zeros(4), [1, 0, 1, 1], categorical=[[0], [0], [1], [1]])
    _, encoder = ordered_encode(ds, SeededRng(0), smoothing=1.0)
    out = encoder.transform(ds)
    p = 0.75
    assert out.numeric[:, 1].tolist() == [(1 + p) / 3, (1 + p) / 3, (2 + p) / 3, (2 + p) / 3]


# ---------------------------------------------------------------- boosting


def test_constant_labels():
    ds = make(np.random.default_rng(0).normal(size=(30, 2)), [1] * 30)
    model = gbdt_fit(ds, m=5, min_samples_leaf=2)
    assert model.base_score == 1.0
    assert all(np.all(t.value == 0.0) for t in model.trees)


def test_perfect_split():
    x = np.r_[np.zeros(10), np.ones(10)]
    ds = make(x, x.astype(int))
    model = gbdt_fit(ds, m=1, max_depth=1, learning_rate=1.0, min_samples_leaf=1)
    assert model.mse_history[-1] == 0.0
    assert gbdt_score(model, ds).tolist() == x.tolist()


def test_empty_model_scores_base():
    ds = random_dataset(0, q=0)
    model = gbdt_fit(ds, m=0)
    assert np.all(gbdt_score(model, ds) == model.base_score)


def test_single_leaf_half_step():
    ds = make(np.zeros(10), [1, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    model = gbdt_fit(ds, m=1, learning_rate=0.5, min_samples_leaf=1)
    tree = model.trees[0]
    assert len(tree.value) == 1
    v = tree.value[0]
    assert np.all(gbdt_score(model, ds) == 0.1 + 0.5 * v)


@given(st.integers(0, 10_000))
@settings(max_examples=15)
def test_mse_non_increasing(seed):
    ds = random_dataset(seed, q=0)
    model = gbdt_fit(ds, m=30, max_depth=3, min_samples_leaf=3)
    h = model.mse_history
    assert all(b <= a for a, b in zip(h, h[1:]))


def test_rejects_categoricals_and_schema_mismatch():
    ds = random_dataset(1, q=1)
    with pytest.raises(CategoricalUnsupported):
        gbdt_fit(ds, m=1)
    model = gbdt_fit(random_dataset(1, p=3, q=0), m=2)
    with pytest.raises(SchemaMismatch):
        gbdt_score(model, np.zeros((2, 5)))


def test_save_load_bit_stable(tmp_path):
    ds = random_dataset(3, q=0)
    model = gbdt_fit(ds, m=20, max_depth=3, min_samples_leaf=3)
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    assert gbdt_score(back, ds).tobytes() == gbdt_score(model, ds).tobytes()
    assert to_json(back) == to_json(model)
    with pytest.raises(SchemaMismatch):
        from_json('{"format": "other"}')


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_mse_gradient_finite_difference(y, f):
    h = 1e-4
    loss = lambda v: (y - v) ** 2  # noqa: E731
    fd = (loss(f + h) - loss(f - h)) / (2 * h)
    assert abs(fd - (-2 * (y - f))) <= 1e-6


# ---------------------------------------------------------------- reimplementation oracle


def reference_boost(X, y, m, lr, depth, leaf):
    """Plain exhaustive least-squares trees on raw thresholds (all unique values)."""
    n, p = X.shape
    F = np.full(n, y.mean())
    hist = [float(np.mean((y - F) ** 2))]
    for _ in range(m):
        r = y - F
        groups = [np.arange(n)]
        for _ in range(depth):
            nxt = []
            for g in groups:
                best = (1e-12, None)
                tot = r[g].sum()
                for j in range(p):
                    for t in np.unique(X[g, j])[:-1]:
                        lm = X[g, j] <= t
                        nl, nr = lm.sum(), (~lm).sum()
                        if nl < leaf or nr < leaf:
                            continue
                        sl = r[g][lm].sum()
                        gain = sl**2 / nl + (tot - sl) ** 2 / nr - tot**2 / len(g)
                        if gain > best[0] + 1e-9 * abs(best[0]):
                            best = (gain, (j, t))
                if best[1] is None:
                    nxt.append(g)
                    continue
                j, t = best[1]
                nxt += [g[X[g, j] <= t], g[X[g, j] > t]]
            groups = nxt
        for g in groups:
            F[g] += lr * r[g].mean()
        hist.append(float(np.mean((y - F) ** 2)))
    return hist


def test_matches_reimplementation():
    r = np.random.default_rng(12)
    X = r.normal(size=(200, 3))
    y = ((X[:, 0] + 0.5 * X[:, 1] ** 2 + 0.3 * r.normal(size=200)) > 0.8).astype(int)
    model = gbdt_fit(make(X, y), m=8, learning_rate=0.3, max_depth=3, min_samples_leaf=5)
    ref = reference_boost(X, y.astype(float), 8, 0.3, 3, 5)
    assert np.allclose(model.mse_history, ref, rtol=1e-9, atol=0)
