import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imbresample.core import AlreadySatisfied, CategoricalUnsupported, SeededRng, class_partition, standardize
from imbresample.neighbors import NeighborIndex, knn_query
from imbresample.undersample import (
    cluster_centroids,
    condensed_nn,
    enn_family,
    instance_hardness_threshold,
    near_miss,
    neighborhood_cleaning,
    one_sided_selection,
    out_of_fold_scores,
    random_under,
    tomek_links,
)
from imbresample.boosting import gbdt_scorer

from _data import feasible_ratio, make, random_dataset


def separated(n_min=5, n_maj=40, seed=0):
    r = np.random.default_rng(seed)
    pts = np.vstack([r.normal(0, 0.3, size=(n_maj, 2)), r.normal(20, 0.3, size=(n_min, 2))])
    return make(pts, np.r_[np.zeros(n_maj), np.ones(n_min)])


def majority_kept(ds, out):
    mino, _ = class_partition(ds)
    return np.setdiff1d(out.kept_indices, mino)


# ---------------------------------------------------------------- random


def test_random_under_target_equals_current():
    ds = make(np.arange(11.0), [1] + [0] * 10)
    out = random_under(ds, 0.1, SeededRng(0))
    assert out.kept_indices.tolist() == list(range(11))


def test_random_under_forced_count():
    ds = make(np.arange(1005.0), [1] * 5 + [0] * 1000)
    out = random_under(ds, 0.1, SeededRng(0))
    assert len(majority_kept(ds, out)) == 50
    assert set(range(5)) <= set(out.kept_indices.tolist())
    assert out.same_as(random_under(ds, 0.1, SeededRng(0)))
    assert not out.same_as(random_under(ds, 0.1, SeededRng(1)))


def test_random_under_already_satisfied():
    ds = make(np.arange(10.0), [1] * 5 + [0] * 5)
    with pytest.raises(AlreadySatisfied):
        random_under(ds, 0.1, SeededRng(0))


# ---------------------------------------------------------------- cluster centroids


def test_cluster_centroids_two_pairs():
    pts = [[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0], [5.0, 5.0]]
    ds = make(pts, [0, 0, 0, 0, 1])
    out = cluster_centroids(ds, 0.5, SeededRng(0))
    assert sorted(map(tuple, out.synthetic_numeric.tolist())) == [(0.0, 0.5), (10.0, 0.5)]
    assert out.kept_indices.tolist() == [4]
    assert out.synthetic_labels.tolist() == [0, 0]


def test_cluster_centroids_identity_case():
    r = np.random.default_rng(0)
    pts = r.normal(size=(5, 2))
    ds = make(pts, [0, 0, 0, 0, 1])
    out = cluster_centroids(ds, 0.25, SeededRng(0))
    assert sorted(map(tuple, out.synthetic_numeric.tolist())) == sorted(map(tuple, pts[:4].tolist()))


def test_cluster_centroids_rejects_categoricals():
    ds = make([[0.0], [1.0], [2.0]], [0, 0, 1], categorical=[[0], [1], [0]])
    with pytest.raises(CategoricalUnsupported):
        cluster_centroids(ds, 0.5, SeededRng(0))


def test_cluster_centroids_inertia_near_restart_oracle():
    r = np.random.default_rng(4)
    centers = r.uniform(-8, 8, size=(20, 2))
    maj = np.vstack([r.normal(c, 0.4, size=(10, 2)) for c in centers])
    ds = make(np.vstack([maj, [[30.0, 30.0], [31.0, 30.0]]]), np.r_[np.zeros(200), np.ones(2)])
    out = cluster_centroids(ds, 0.1, SeededRng(1))
    assert out.n_synthetic == 20
    z, _, _ = standardize(ds.numeric)
    zm = z[:200]
    rr = np.random.default_rng(0)
    best = np.inf
    for _ in range(100):
        cents = zm[rr.choice(200, 20, replace=False)]
        for _ in range(100):
            lab = np.argmin(((zm[:, None] - cents[None]) ** 2).sum(-1), axis=1)
            new = np.array([zm[lab == c].mean(0) if np.any(lab == c) else cents[c] for c in range(20)])
            if np.allclose(new, cents):
                break
            cents = new
        best = min(best, ((zm - cents[lab]) ** 2).sum())
    assert out.info["inertia"] <= 1.05 * best


# ---------------------------------------------------------------- NearMiss


def test_near_miss_line_examples():
    ds = make([0.0, 1.0, 2.0, 100.0], [1, 0, 0, 0])
    assert majority_kept(ds, near_miss(ds, 1.0, version=1, k=1)).tolist() == [1]
    assert majority_kept(ds, near_miss(ds, 1.0, version=2, k=1)).tolist() == [3]


@given(st.integers(0, 5000))
@settings(max_examples=15)
def test_near_miss_v1_ranking(seed):
    r = np.random.default_rng(seed)
    pts = r.normal(size=(50, 2))
    labels = np.zeros(50, dtype=int)
    labels[:4] = 1
    ds = make(pts, labels)
    out = near_miss(ds, 0.4, version=1, k=3)
    z, _, _ = standardize(pts)
    scores = []
    for i in range(4, 50):
        d = sorted(float(np.sqrt(((z[i] - z[j]) ** 2).sum())) for j in range(4))
        scores.append((sum(d[:3]) / 3, i))
    expect = sorted(i for _, i in sorted(scores)[:10])
    assert majority_kept(ds, out).tolist() == expect


def test_near_miss_v3_keeps_at_most_target():
    ds = random_dataset(3, n=120, q=0)
    n_min = int(ds.labels.sum())
    out = near_miss(ds, 0.5, version=3, k=3, m=3)
    kept = majority_kept(ds, out)
    assert len(kept) <= int(n_min / 0.5)
    assert len(kept) <= out.info["reduced_majority"]


# ---------------------------------------------------------------- CNN / Tomek / OSS


def test_cnn_separated_keeps_one_majority():
    ds = separated()
    for seed in range(5):
        out = condensed_nn(ds, SeededRng(seed))
        assert len(majority_kept(ds, out)) == 1
        assert set(range(40, 45)) <= set(out.kept_indices.tolist())


def test_cnn_majority_row_inside_minority_cluster_enters():
    mino = [[0.0, 0.0], [0.0, 2.0], [2.0, 0.0], [2.0, 2.0]]
    maj = [[10.0, 10.0], [11.0, 10.0], [10.0, 11.0], [11.0, 11.0], [1.0, 1.0]]
    ds = make(mino + maj, [1] * 4 + [0] * 5)
    for seed in range(8):
        assert 8 in condensed_nn(ds, SeededRng(seed)).kept_indices.tolist()


def test_tomek_examples():
    ds = make([[0.0, 0.0], [0.1, 0.0], [9.0, 9.0], [9.5, 9.0]], [0, 1, 0, 0])
    assert tomek_links(ds).kept_indices.tolist() == [1, 2, 3]
    assert tomek_links(ds, scope="both").kept_indices.tolist() == [2, 3]
    sep = separated()
    assert tomek_links(sep).kept_indices.tolist() == list(range(45))


@given(st.integers(0, 5000))
@settings(max_examples=20)
def test_tomek_removed_rows_were_linked(seed):
    ds = random_dataset(seed, q=0)
    out = tomek_links(ds, scope="both")
    z, _, _ = standardize(ds.numeric)
    removed = np.setdiff1d(np.arange(ds.n_rows), out.kept_indices)
    nn, _ = knn_query(NeighborIndex(z), np.arange(ds.n_rows), 1)
    nn = nn[:, 0]
    for r in removed:
        assert nn[nn[r]] == r and ds.labels[nn[r]] != ds.labels[r]


def test_oss_separated_and_linked():
    ds = separated()
    out = one_sided_selection(ds, SeededRng(3))
    assert len(majority_kept(ds, out)) == 1
    linked = make([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.2, 5.0], [5.0, 5.3], [9.0, 0.0]], [0, 1, 0, 0, 0, 1])
    for seed in range(5):
        assert 0 not in one_sided_selection(linked, SeededRng(seed)).kept_indices.tolist()


# ---------------------------------------------------------------- ENN family / NCR


def test_enn_removes_lone_majority_row():
    mino = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0], [0.5, 1.2]]
    maj = [[0.5, 0.5], [10.0, 10.0], [10.5, 10.0], [10.0, 10.5], [10.5, 10.5], [11.0, 11.0]]
    ds = make(mino + maj, [1] * 5 + [0] * 6)
    out = enn_family(ds, "ENN", criterion="all", k=3)
    assert 5 not in out.kept_indices.tolist()
    assert set(range(5)) <= set(out.kept_indices.tolist())


@pytest.mark.parametrize("variant", ["ENN", "RENN", "AllKNN"])
def test_enn_homogeneous_classes(variant):
    ds = separated()
    assert enn_family(ds, variant, k=3).kept_indices.tolist() == list(range(45))


@given(st.integers(0, 5000))
@settings(max_examples=15)
def test_renn_majority_strictly_decreases(seed):
    ds = random_dataset(seed, q=0, minority_share=0.2)
    passes = enn_family(ds, "RENN", k=3).info["n_iter"]
    # every pass but the last one removes something; the last removes nothing
    counts = [int((ds.labels == 0).sum())]
    for it in range(1, passes + 1):
        out = enn_family(ds, "RENN", k=3, max_iter=it)
        counts.append(int((ds.labels[out.kept_indices] == 0).sum()))
    assert all(b < a for a, b in zip(counts[:-2], counts[1:-1]))
    assert counts[-1] == counts[-2]


def test_ncr_separated_no_removal():
    ds = separated()
    assert neighborhood_cleaning(ds).kept_indices.tolist() == list(range(45))


def test_ncr_removes_vote_flipping_majority_rows():
    xs = [0.0, 20.0] + [0.1 * i for i in range(1, 11)]
    ds = make(xs, [1, 1] + [0] * 10)
    kept = neighborhood_cleaning(ds, k=3).kept_indices.tolist()
    # row 0's 3-NN vote (rows at 0.1, 0.2, 0.3) misclassifies it
    assert {2, 3, 4}.isdisjoint(kept)
    assert {0, 1, 5, 6, 7}.issubset(kept)
    # row at 0.1 survives a plain ENN pass; only the cleaning step removes it
    assert 2 in enn_family(ds, "ENN", k=3).kept_indices.tolist()


# ---------------------------------------------------------------- instance hardness


def fixed_scorer(p_one):
    """Scorer that looks rows up by their first feature (the row id)."""

    def score(train, test, rng):
        return np.array([p_one[int(v)] for v in test.numeric[:, 0]])

    return score


def test_iht_keeps_top_probabilities():
    ds = make(np.arange(4.0), [0, 0, 0, 1])
    own = {0: 0.9, 1: 0.8, 2: 0.1}
    p_one = {i: 1.0 - own[i] for i in own} | {3: 0.5}
    out = instance_hardness_threshold(ds, 0.5, scorer=fixed_scorer(p_one), rng=SeededRng(0))
    assert out.kept_indices.tolist() == [0, 1, 3]


def test_iht_ties_keep_lowest_index():
    ds = make(np.arange(6.0), [0, 0, 0, 0, 1, 0])
    p_one = {i: 0.3 for i in range(6)}
    out = instance_hardness_threshold(ds, 0.5, scorer=fixed_scorer(p_one), rng=SeededRng(0))
    assert out.kept_indices.tolist() == [0, 1, 4]


def test_iht_rerun_oracle():
    r = np.random.default_rng(0)
    n_maj, n_min = 270, 30
    pts = np.vstack([r.normal(0, 1, size=(n_maj, 2)), r.normal(1.5, 1, size=(n_min, 2))])
    ds = make(pts, np.r_[np.zeros(n_maj), np.ones(n_min)])
    out = instance_hardness_threshold(ds, 0.25, rng=SeededRng(5))
    proba = out_of_fold_scores(ds, gbdt_scorer, 3, SeededRng(5))
    own = 1.0 - proba[:n_maj]
    keep = np.argsort(-own, kind="stable")[:120]
    assert majority_kept(ds, out).tolist() == sorted(keep.tolist())
    assert out.info["oof_proba"].tobytes() == proba.tobytes()


# ---------------------------------------------------------------- shared invariants

UNDER_METHODS = [
    lambda ds, r: random_under(ds, r, SeededRng(1)),
    lambda ds, r: near_miss(ds, r, version=1),
    lambda ds, r: near_miss(ds, r, version=2),
    lambda ds, r: instance_hardness_threshold(ds, r, rng=SeededRng(1)),
]
CLEANERS = [
    lambda ds: condensed_nn(ds, SeededRng(1)),
    lambda ds: tomek_links(ds),
    lambda ds: one_sided_selection(ds, SeededRng(1)),
    lambda ds: enn_family(ds, "ENN"),
    lambda ds: enn_family(ds, "RENN"),
    lambda ds: enn_family(ds, "AllKNN", criterion="all"),
    lambda ds: neighborhood_cleaning(ds),
]


@given(st.integers(0, 10_000), st.sampled_from(range(len(UNDER_METHODS))))
@settings(max_examples=30)
def test_ratio_window_and_minority_preserved(seed, which):
    ds = random_dataset(seed)
    mino, _ = class_partition(ds)
    target = feasible_ratio(ds, seed)
    out = UNDER_METHODS[which](ds, target)
    kept = majority_kept(ds, out)
    assert set(mino.tolist()) <= set(out.kept_indices.tolist())
    ratio = len(mino) / len(kept)
    assert target <= ratio <= target + 1 / len(kept)
    assert out.n_synthetic == 0


@given(st.integers(0, 10_000), st.sampled_from(range(len(CLEANERS))))
@settings(max_examples=30)
def test_cleaners_only_remove_majority(seed, which):
    ds = random_dataset(seed)
    mino, _ = class_partition(ds)
    out = CLEANERS[which](ds)
    assert set(mino.tolist()) <= set(out.kept_indices.tolist())
    assert np.all(np.diff(out.kept_indices) > 0)
    assert out.n_synthetic == 0
