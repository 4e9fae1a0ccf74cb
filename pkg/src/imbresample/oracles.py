"""Brute-force reference resamplers for equivalence testing.

Each oracle is a plain-loop transcription of a method's step list. Oracles
share only the data types, the PRNG and the class-count helpers from
:mod:`imbresample.core` with the optimized code (plus the hardness scorer
for the instance-hardness method, which is a pluggable model rather than part
of the selection rule). Random draws are made one scalar at a time; the PRNG
guarantees that this consumes the stream exactly like the array draws of the
optimized implementation.

Arithmetic follows the same association order as the optimized code
(sequential sums over feature columns and rows, ``math.fsum`` for inertia
and spread), so outputs are expected to be bit-identical.
"""
from __future__ import annotations

import math
import statistics

import numpy as np

from .core import (
    AlreadySatisfied,
    CategoricalUnsupported,
    DataError,
    Dataset,
    DegenerateSignal,
    KTooLarge,
    ResampleOutput,
    SeededRng,
    as_rng,
    class_partition,
    resolve_counts,
)

SIZE_CAP = 500


class OracleTooLarge(ValueError):
    pass


class UnknownMethod(KeyError):
    pass


# same names as the optimized module's signals, defined independently
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


# --------------------------------------------------------------------------
# primitives


def _fisher_yates(items: list, rng: SeededRng) -> list:
    out = list(items)
    n = len(out)
    for i in range(n - 1):
        j = i + rng.randbelow(n - i)
        out[i], out[j] = out[j], out[i]
    return out


def _sample(n: int, k: int, rng: SeededRng) -> list:
    pool = list(range(n))
    for i in range(k):
        j = i + rng.randbelow(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def _seq_sum(values):
    total = None
    for v in values:
        total = v if total is None else total + v
    return total


def _standardize(rows: list) -> tuple[list, list, list]:
    n = len(rows)
    d = len(rows[0]) if n else 0
    if n == 0 or d == 0:
        return [list(r) for r in rows], [0.0] * d, [1.0] * d
    mean = [_seq_sum(r[j] for r in rows) / n for j in range(d)]
    centered = [[r[j] - mean[j] for j in range(d)] for r in rows]
    std = []
    for j in range(d):
        s = math.sqrt(_seq_sum(c[j] * c[j] for c in centered) / n)
        std.append(1.0 if s == 0 else s)
    z = [[c[j] / std[j] for j in range(d)] for c in centered]
    return z, mean, std


class _Space:
    """Standardized points, categorical codes, mismatch penalty and a pairwise cache."""

    def __init__(self, dataset: Dataset):
        self.labels = [int(v) for v in dataset.labels]
        self.z, self.mean, self.std = _standardize(dataset.numeric.tolist())
        self.cat = [tuple(r) for r in dataset.categorical.tolist()] if dataset.n_categorical else None
        delta = 0.0
        if self.cat is not None:
            delta = 1.0
            d = dataset.n_numeric
            if d:
                label = self.labels[int(class_partition(dataset)[0][0])]
                zm = [self.z[i] for i in range(len(self.z)) if self.labels[i] == label]
                stds = []
                for j in range(d):
                    mu = _seq_sum(r[j] for r in zm) / len(zm)
                    stds.append(math.sqrt(_seq_sum((r[j] - mu) * (r[j] - mu) for r in zm) / len(zm)))
                delta = float(statistics.median(stds))
        self.delta2 = delta * delta
        self._cache = {}

    def d2(self, a: int, b: int) -> float:
        key = (a, b) if a <= b else (b, a)
        if key not in self._cache:
            s = 0.0
            for x, y in zip(self.z[a], self.z[b]):
                diff = x - y
                s += diff * diff
            if self.cat is not None and len(self.cat[a]):
                mism = sum(1 for u, v in zip(self.cat[a], self.cat[b]) if u != v)
                s += self.delta2 * mism
            self._cache[key] = s
        return self._cache[key]

    def nearest(self, row: int, candidates, k: int) -> list:
        """k candidates closest to ``row`` (row itself skipped), ties to the lower index."""
        ranked = sorted((self.d2(row, c), c) for c in candidates if c != row)
        return [c for _, c in ranked[:k]]

    def farthest(self, row: int, candidates, k: int) -> list:
        ranked = sorted((-self.d2(row, c), c) for c in candidates if c != row)
        return [c for _, c in ranked[:k]]


def _check_size(dataset: Dataset):
    if dataset.n_rows > SIZE_CAP:
        raise OracleTooLarge(f"oracles handle at most {SIZE_CAP} rows, got {dataset.n_rows}")


def _clamp(k: int, available: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    if available < 1:
        raise KTooLarge("no candidates available")
    return min(k, available)


def _classes(dataset: Dataset):
    mino, majo = class_partition(dataset)
    labels = [int(v) for v in dataset.labels]
    return [int(i) for i in mino], [int(i) for i in majo], labels[int(mino[0])], labels[int(majo[0])]


def _output(dataset, kept, syn_num=(), syn_cat=(), syn_lab=(), base=(), nbr=(), lam=(), info=None):
    m = len(syn_lab)
    return ResampleOutput(
        np.array(sorted(set(int(i) for i in kept)), dtype=np.int64),
        np.array(syn_num, dtype=np.float64).reshape(m, dataset.n_numeric),
        np.array(syn_cat, dtype=np.int64).reshape(m, dataset.n_categorical),
        np.array(syn_lab, dtype=np.int64).reshape(m),
        np.array(base, dtype=np.int64).reshape(m),
        np.array(nbr, dtype=np.int64).reshape(m),
        np.array(lam, dtype=np.float64).reshape(m),
        info or {},
    )


# --------------------------------------------------------------------------
# undersampling


def random_under(dataset, ratio=0.1, rng=None):
    mino, majo, _, _ = _classes(dataset)
    target = resolve_counts(ratio, len(mino), len(majo), "under")
    picks = _sample(len(majo), target, as_rng(rng))
    return _output(dataset, mino + [majo[p] for p in picks])


def _lloyd(points, init, max_iter):
    cents = [list(c) for c in init]

    def assign(cents):
        labels, best = [], []
        for p in points:
            dists = []
            for c in cents:
                s = 0.0
                for x, y in zip(p, c):
                    diff = x - y
                    s += diff * diff
                dists.append(s)
            j = dists.index(min(dists))
            labels.append(j)
            best.append(dists[j])
        return labels, math.fsum(best)

    labels, inertia = assign(cents)
    for _ in range(max_iter):
        sums = [[0.0] * len(points[0]) for _ in cents]
        counts = [0] * len(cents)
        for p, lab in zip(points, labels):
            counts[lab] += 1
            for j, v in enumerate(p):
                sums[lab][j] += v
        cents = [[s / counts[c] for s in sums[c]] if counts[c] else cents[c] for c in range(len(cents))]
        new, inertia = assign(cents)
        if new == labels:
            break
        labels = new
    return cents, labels, inertia


def _plusplus(points, k, rng):
    def d2(p, c):
        s = 0.0
        for x, y in zip(p, c):
            diff = x - y
            s += diff * diff
        return s

    n = len(points)
    chosen = [rng.randbelow(n)]
    best = [d2(p, points[chosen[0]]) for p in points]
    for _ in range(1, k):
        total, cum = 0.0, []
        for v in best:
            total += v
            cum.append(total)
        if total > 0.0:
            u = rng.uniform() * total
            pick = next((i for i, c in enumerate(cum) if c > u), n - 1)
        else:
            pick = next(i for i in range(n) if i not in chosen)
        chosen.append(pick)
        best = [min(b, d2(p, points[pick])) for b, p in zip(best, points)]
        best[pick] = 0.0
    return chosen


def _kmeans(points, k, rng, max_iter=300, n_init=10):
    if k < 1 or k > len(points):
        raise KTooLarge(f"k={k} with {len(points)} points")
    best = None
    for _ in range(n_init):
        init = [points[i] for i in _plusplus(points, k, rng)]
        run = _lloyd(points, init, max_iter)
        if best is None or run[2] < best[2]:
            best = run
    return best


def cluster_centroids(dataset, ratio=0.1, rng=None, max_iter=300, n_init=30):
    if dataset.n_categorical:
        raise CategoricalUnsupported("numeric-only")
    mino, majo, _, maj_label = _classes(dataset)
    target = resolve_counts(ratio, len(mino), len(majo), "under")
    z, mean, std = _standardize(dataset.numeric.tolist())
    cents, assign, _ = _kmeans([z[i] for i in majo], target, as_rng(rng), max_iter, n_init)
    raw = dataset.numeric.tolist()
    out = []
    for c in range(target):
        members = [raw[majo[p]] for p in range(len(majo)) if assign[p] == c]
        if members:
            sums = [0.0] * dataset.n_numeric
            for r in members:
                for j in range(dataset.n_numeric):
                    sums[j] += r[j]
            out.append([s / len(members) for s in sums])
        else:
            out.append([cents[c][j] * std[j] + mean[j] for j in range(dataset.n_numeric)])
    none = [-1] * target
    return _output(dataset, mino, out, [], [maj_label] * target, none, none, [0.0] * target)


def near_miss(dataset, ratio=0.1, version=1, k=3, m=3):
    if version not in (1, 2, 3):
        raise ValueError("version must be 1, 2 or 3")
    mino, majo, _, _ = _classes(dataset)
    target = resolve_counts(ratio, len(mino), len(majo), "under")
    space = _Space(dataset)
    candidates = majo
    if version == 3:
        m_eff = _clamp(m, len(majo))
        union = set()
        for r in mino:
            union.update(space.nearest(r, majo, m_eff))
        candidates = sorted(union)
    k_eff = _clamp(k, len(mino))
    scored = []
    for pos, c in enumerate(candidates):
        picks = space.nearest(c, mino, k_eff) if version == 1 else space.farthest(c, mino, k_eff)
        total = 0.0
        for p in picks:
            total += math.sqrt(space.d2(c, p))
        score = total / k_eff
        scored.append((score if version == 1 else -score, pos, c))
    scored.sort()
    return _output(dataset, mino + [c for _, _, c in scored[:target]])


def _condense(space, active, keep_label, rng, repeat):
    labels = space.labels
    base = [a for a in active if labels[a] == keep_label]
    pool = [a for a in active if labels[a] != keep_label]
    if not pool:
        return sorted(base)
    seed = pool[rng.randbelow(len(pool))]
    order = _fisher_yates([p for p in pool if p != seed], rng)
    store = set(base) | {seed}
    while True:
        added = False
        for r in order:
            if r in store:
                continue
            nearest = min(store, key=lambda s: (space.d2(r, s), s))
            if labels[nearest] != labels[r]:
                store.add(r)
                added = True
        if not (added and repeat):
            break
    return sorted(store)


def condensed_nn(dataset, rng=None):
    _check_size(dataset)
    _, _, min_label, _ = _classes(dataset)
    space = _Space(dataset)
    return _output(dataset, _condense(space, list(range(dataset.n_rows)), min_label, as_rng(rng), True))


def _tomek_pairs(space, rows):
    """Mutual 1-NN cross-class pairs over ``rows`` by a full quadratic scan."""
    nn = {}
    for r in rows:
        best = None
        for c in rows:
            if c != r and (best is None or (space.d2(r, c), c) < (space.d2(r, best), best)):
                best = c
        nn[r] = best
    return {r for r in rows if nn[r] is not None and nn[nn[r]] == r and space.labels[r] != space.labels[nn[r]]}


def _tomek_survivors(space, min_label, scope):
    rows = list(range(len(space.labels)))
    linked = _tomek_pairs(space, rows) if len(rows) >= 2 else set()
    if scope == "majority":
        linked = {r for r in linked if space.labels[r] != min_label}
    return [r for r in rows if r not in linked]


def tomek_links(dataset, scope="majority"):
    if scope not in ("majority", "both"):
        raise ValueError("scope must be 'majority' or 'both'")
    _check_size(dataset)
    _, _, min_label, _ = _classes(dataset)
    return _output(dataset, _tomek_survivors(_Space(dataset), min_label, scope))


def one_sided_selection(dataset, rng=None):
    _check_size(dataset)
    _, _, min_label, _ = _classes(dataset)
    space = _Space(dataset)
    survivors = _tomek_survivors(space, min_label, "majority")
    return _output(dataset, _condense(space, survivors, min_label, as_rng(rng), False))


def _enn_pass(space, active, k, criterion, removable):
    if len(active) < 2:
        return active
    k_eff = _clamp(k, len(active) - 1)
    labels = space.labels
    keep = []
    for a in active:
        same = sum(1 for b in space.nearest(a, active, k_eff) if labels[b] == labels[a])
        ok = same == k_eff if criterion == "all" else 2 * same > k_eff
        if ok or (removable is not None and labels[a] != removable):
            keep.append(a)
    return keep


def enn_family(dataset, variant="ENN", criterion="mode", k=3, max_iter=100, clean="majority"):
    if variant not in ("ENN", "RENN", "AllKNN") or criterion not in ("all", "mode") or clean not in ("majority", "all"):
        raise ValueError("bad ENN option")
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_size(dataset)
    _, _, _, maj_label = _classes(dataset)
    removable = maj_label if clean == "majority" else None
    space = _Space(dataset)
    active = list(range(dataset.n_rows))
    passes = 0
    if variant == "ENN":
        active = _enn_pass(space, active, k, criterion, removable)
        passes = 1
    elif variant == "RENN":
        while passes < max_iter:
            passes += 1
            nxt = _enn_pass(space, active, k, criterion, removable)
            stop = len(nxt) == len(active)
            active = nxt
            if stop:
                break
    else:
        for kk in range(1, k + 1):
            passes += 1
            active = _enn_pass(space, active, kk, criterion, removable)
    return _output(dataset, active, info={"n_iter": passes})


def neighborhood_cleaning(dataset, k=3):
    _check_size(dataset)
    mino, _, _, maj_label = _classes(dataset)
    space = _Space(dataset)
    rows = list(range(dataset.n_rows))
    removed = set(rows) - set(_enn_pass(space, rows, k, "mode", maj_label))
    k_eff = _clamp(k, dataset.n_rows - 1)
    for r in mino:
        nn = space.nearest(r, rows, k_eff)
        votes = sum(1 for b in nn if space.labels[b] == maj_label)
        if 2 * votes > k_eff:
            removed.update(b for b in nn if space.labels[b] == maj_label)
    return _output(dataset, [r for r in rows if r not in removed])


def instance_hardness_threshold(dataset, ratio=0.1, scorer=None, folds=3, rng=None):
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if scorer is None:
        from .boosting import gbdt_scorer as scorer
    rng = as_rng(rng)
    mino, majo, _, maj_label = _classes(dataset)
    target = resolve_counts(ratio, len(mino), len(majo), "under")
    labels = [int(v) for v in dataset.labels]
    fold = [0] * len(labels)
    for value in (0, 1):
        rows = _fisher_yates([i for i in range(len(labels)) if labels[i] == value], rng)
        for pos, r in enumerate(rows):
            fold[r] = pos % folds
    proba = [0.0] * len(labels)
    for f in range(folds):
        test = [i for i in range(len(labels)) if fold[i] == f]
        if not test:
            continue
        train = [i for i in range(len(labels)) if fold[i] != f]
        p = scorer(dataset.take(train), dataset.take(test), rng.derive(f))
        for i, v in zip(test, np.asarray(p).tolist()):
            proba[i] = v
    own = [p if maj_label == 1 else 1.0 - p for p in proba]
    ranked = sorted(range(len(majo)), key=lambda pos: (-own[majo[pos]], pos))
    return _output(dataset, mino + [majo[pos] for pos in ranked[:target]])


# --------------------------------------------------------------------------
# oversampling


def _new_count(dataset, ratio):
    mino, majo, min_label, _ = _classes(dataset)
    target = resolve_counts(ratio, len(mino), len(majo), "over")
    return mino, majo, min_label, target - len(mino)


def _neighbor_table(space, members, k):
    if len(members) < 2:
        raise MinorityTooSmall("need at least 2 minority rows")
    k_eff = _clamp(k, len(members) - 1)
    return [space.nearest(r, members, k_eff) for r in members], k_eff


def _mode_codes(dataset, table_row):
    out = []
    for j in range(dataset.n_categorical):
        counts = [0] * len(dataset.categories[j])
        for r in table_row:
            counts[int(dataset.categorical[r, j])] += 1
        out.append(counts.index(max(counts)))
    return out


def _synthesize(dataset, min_label, members, table, picks, info=None):
    """``picks``: (base position into members, neighbor slot, lambda)."""
    raw = dataset.numeric.tolist()
    nums, cats, bases, nbrs, lams = [], [], [], [], []
    for pos, slot, lam in picks:
        b = members[pos]
        n = table[pos][slot]
        nums.append([xb + lam * (xn - xb) for xb, xn in zip(raw[b], raw[n])])
        cats.append(_mode_codes(dataset, table[pos]))
        bases.append(b)
        nbrs.append(n)
        lams.append(lam)
    kept = list(range(dataset.n_rows))
    return _output(dataset, kept, nums, cats, [min_label] * len(picks), bases, nbrs, lams, info)


def _draw(rng, n, bound_pos, bound_slot):
    pos = [bound_pos(rng.randbelow) for _ in range(n)]
    slots = [rng.randbelow(bound_slot) for _ in range(n)]
    lams = [rng.uniform() for _ in range(n)]
    return list(zip(pos, slots, lams))


def random_over(dataset, ratio=0.1, rng=None):
    rng = as_rng(rng)
    mino, _, min_label, n_new = _new_count(dataset, ratio)
    raw = dataset.numeric.tolist()
    picks = [mino[rng.randbelow(len(mino))] for _ in range(n_new)]
    nums = [[x + 0.0 * (x - x) for x in raw[b]] for b in picks]
    cats = [dataset.categorical[b].tolist() for b in picks]
    return _output(
        dataset, range(dataset.n_rows), nums, cats, [min_label] * n_new, picks, picks, [0.0] * n_new
    )


def smote(dataset, ratio=0.1, k=5, rng=None):
    _check_size(dataset)
    rng = as_rng(rng)
    mino, _, min_label, n_new = _new_count(dataset, ratio)
    space = _Space(dataset)
    table, k_eff = _neighbor_table(space, mino, k)
    picks = _draw(rng, n_new, lambda rb: rb(len(mino)), k_eff)
    return _synthesize(dataset, min_label, mino, table, picks)


def smote_nc(dataset, ratio=0.1, k=5, rng=None):
    if dataset.n_categorical == 0:
        raise ValueError("smote_nc needs at least one categorical column")
    return smote(dataset, ratio, k, rng)


def _fallback(dataset, ratio, k, rng, err):
    out = smote(dataset, ratio, k, rng)
    out.info["fallback"] = type(err).__name__
    return out


def _majority_share(space, rows, k, min_label):
    everyone = list(range(len(space.labels)))
    k_eff = _clamp(k, len(everyone) - 1)
    counts = [sum(1 for b in space.nearest(r, everyone, k_eff) if space.labels[b] != min_label) for r in rows]
    return counts, k_eff


def _apportion(total, weights):
    if not weights or total == 0:
        return [0] * len(weights)
    if all(isinstance(w, int) for w in weights):
        denom = sum(weights)
        floors = [total * w // denom for w in weights]
        rems = [total * w % denom for w in weights]
    else:
        denom = math.fsum(weights)
        quotas = [total * w / denom for w in weights]
        floors = [math.floor(q) for q in quotas]
        rems = [q - f for q, f in zip(quotas, floors)]
    left = total - sum(floors)
    for i in sorted(range(len(weights)), key=lambda i: (-rems[i], i))[:left]:
        floors[i] += 1
    return floors


def adasyn(dataset, ratio=0.1, k=5, rng=None, fallback=False):
    _check_size(dataset)
    rng = as_rng(rng)
    mino, _, min_label, n_new = _new_count(dataset, ratio)
    space = _Space(dataset)
    counts, _ = _majority_share(space, mino, k, min_label)
    if sum(counts) == 0:
        err = NoBoundary("no minority row has a majority neighbor")
        if fallback:
            return _fallback(dataset, ratio, k, rng, err)
        raise err
    table, k_eff = _neighbor_table(space, mino, k)
    per_row = _apportion(n_new, counts)
    positions = [i for i, g in enumerate(per_row) for _ in range(g)]
    slots = [rng.randbelow(k_eff) for _ in range(n_new)]
    lams = [rng.uniform() for _ in range(n_new)]
    return _synthesize(dataset, min_label, mino, table, list(zip(positions, slots, lams)))


def borderline_smote(dataset, ratio=0.1, k=5, rng=None, fallback=False):
    _check_size(dataset)
    rng = as_rng(rng)
    mino, _, min_label, n_new = _new_count(dataset, ratio)
    space = _Space(dataset)
    counts, k_eff_all = _majority_share(space, mino, k, min_label)
    danger = [i for i, c in enumerate(counts) if 2 * c >= k_eff_all and c < k_eff_all]
    if not danger:
        err = NoDanger("no minority row is in danger")
        if fallback:
            return _fallback(dataset, ratio, k, rng, err)
        raise err
    table, k_eff = _neighbor_table(space, mino, k)
    picks = _draw(rng, n_new, lambda rb: danger[rb(len(danger))], k_eff)
    return _synthesize(dataset, min_label, mino, table, picks)


def kmeans_smote(dataset, ratio=0.1, n_clusters=8, density_exponent=None, k=5, rng=None, fallback=False, n_init=10):
    if dataset.n_categorical:
        raise CategoricalUnsupported("numeric-only")
    _check_size(dataset)
    rng = as_rng(rng)
    mino, _, min_label, n_new = _new_count(dataset, ratio)
    space = _Space(dataset)
    n_clusters = _clamp(n_clusters, dataset.n_rows)
    _, assign, _ = _kmeans(space.z, n_clusters, rng, 300, n_init)
    exponent = float(density_exponent if density_exponent is not None else max(dataset.n_numeric, 1))
    members, weights = [], []
    for c in range(n_clusters):
        rows = [i for i in range(dataset.n_rows) if assign[i] == c]
        mins = [i for i in rows if space.labels[i] == min_label]
        if len(mins) >= 2 and len(mins) > len(rows) - len(mins):
            dists = []
            for a in range(len(mins)):
                for b in range(a + 1, len(mins)):
                    s = 0.0
                    for x, y in zip(space.z[mins[b]], space.z[mins[a]]):
                        diff = x - y
                        s += diff * diff
                    dists.append(math.sqrt(s))
            spread = max(math.fsum(dists) / len(dists), 1e-12)
            members.append(mins)
            weights.append(len(mins) / spread**exponent)
    if not members:
        err = NoEligibleCluster("no eligible cluster")
        if fallback:
            return _fallback(dataset, ratio, k, rng, err)
        raise err
    raw = dataset.numeric.tolist()
    nums, bases, nbrs, lams = [], [], [], []
    for mins, g in zip(members, _apportion(n_new, weights)):
        if g == 0:
            continue
        table, k_eff = _neighbor_table(space, mins, k)
        for pos, slot, lam in _draw(rng, g, lambda rb: rb(len(mins)), k_eff):
            b, n = mins[pos], table[pos][slot]
            nums.append([xb + lam * (xn - xb) for xb, xn in zip(raw[b], raw[n])])
            bases.append(b)
            nbrs.append(n)
            lams.append(lam)
    return _output(dataset, range(dataset.n_rows), nums, [], [min_label] * n_new, bases, nbrs, lams)


def _margin_support(z, is_pos, rng, epochs, reg, batch_size=64):
    n, d = len(z), len(z[0])
    y = [1.0 if p else -1.0 for p in is_pos]

    def score(x, w, b):
        s = 0.0
        for wj, xj in zip(w, x):
            s += wj * xj
        return s + b

    w, b = [0.0] * d, 0.0
    wa, ba = [0.0] * d, 0.0
    t = 0
    for _ in range(epochs):
        order = _fisher_yates(list(range(n)), rng)
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            viol = [i for i in batch if y[i] * score(z[i], w, b) < 1.0]
            t += 1
            eta = 1.0 / (1.0 + reg * t)
            size = float(len(batch))
            if viol:
                pull = [_seq_sum(y[i] * z[i][j] for i in viol) for j in range(d)]
                pull_b = _seq_sum(y[i] for i in viol)
            else:
                pull, pull_b = [0.0] * d, 0.0
            w = [w[j] - eta * (reg * w[j] - pull[j] / size) for j in range(d)]
            b = b + eta * (pull_b / size)
            wa = [wa[j] + (w[j] - wa[j]) / t for j in range(d)]
            ba = ba + (b - ba) / t
    return {i for i in range(n) if y[i] * score(z[i], wa, ba) <= 1.0}


def svm_smote(dataset, ratio=0.1, k=5, rng=None, fallback=False, epochs=20, reg=1e-3):
    if dataset.n_categorical:
        raise CategoricalUnsupported("numeric-only")
    _check_size(dataset)
    rng = as_rng(rng)
    mino, _, min_label, n_new = _new_count(dataset, ratio)
    space = _Space(dataset)
    support = _margin_support(space.z, [lab == min_label for lab in space.labels], rng, epochs, reg)
    support_pos = [p for p, r in enumerate(mino) if r in support]
    if not support_pos:
        err = NoSupportVectors("no minority support rows")
        if fallback:
            return _fallback(dataset, ratio, k, rng, err)
        raise err
    counts, k_all = _majority_share(space, [mino[p] for p in support_pos], k, min_label)
    interpolating = {p: 2 * (k_all - c) >= k_all for p, c in zip(support_pos, counts)}
    table, k_eff = _neighbor_table(space, mino, k)
    picks = []
    for pos, slot, lam in _draw(rng, n_new, lambda rb: support_pos[rb(len(support_pos))], k_eff):
        picks.append((pos, slot, lam) if interpolating[pos] else (pos, 0, lam * 0.5))
    return _synthesize(dataset, min_label, mino, table, picks)


# --------------------------------------------------------------------------
# combined


def _smote_then(dataset, cleaner, ratio, k, rng):
    first = smote(dataset, ratio, k, as_rng(rng))
    augmented = first.apply(dataset)
    second = cleaner(augmented)
    n_kept = len(first.kept_indices)
    kept, syn = [], []
    for r in second.kept_indices.tolist():
        if r < n_kept:
            kept.append(int(first.kept_indices[r]))
        else:
            syn.append(r - n_kept)
    return _output(
        dataset,
        kept,
        [first.synthetic_numeric[s].tolist() for s in syn],
        [first.synthetic_categorical[s].tolist() for s in syn],
        [int(first.synthetic_labels[s]) for s in syn],
        [int(first.provenance_base[s]) for s in syn],
        [int(first.provenance_neighbor[s]) for s in syn],
        [float(first.provenance_lambda[s]) for s in syn],
    )


def smote_enn(dataset, ratio=0.1, k=5, rng=None, enn_k=3, enn_criterion="mode"):
    return _smote_then(
        dataset, lambda d: enn_family(d, "ENN", enn_criterion, enn_k, clean="all"), ratio, k, rng
    )


def smote_tomek(dataset, ratio=0.1, k=5, rng=None):
    return _smote_then(dataset, lambda d: tomek_links(d, "both"), ratio, k, rng)


# --------------------------------------------------------------------------
# lookup


def _none(dataset, ratio=0.1, rng=None):
    return _output(dataset, range(dataset.n_rows))


# name -> (function, takes ratio, takes rng, fixed keyword arguments)
_ORACLES = {
    "none": (_none, True, True, {}),
    "random_under": (random_under, True, True, {}),
    "cluster_centroids": (cluster_centroids, True, True, {}),
    "near_miss": (near_miss, True, False, {}),
    "condensed_nn": (condensed_nn, False, True, {}),
    "tomek_links": (tomek_links, False, False, {}),
    "one_sided_selection": (one_sided_selection, False, True, {}),
    "enn": (enn_family, False, False, {"variant": "ENN"}),
    "renn": (enn_family, False, False, {"variant": "RENN"}),
    "allknn": (enn_family, False, False, {"variant": "AllKNN"}),
    "neighborhood_cleaning": (neighborhood_cleaning, False, False, {}),
    "instance_hardness_threshold": (instance_hardness_threshold, True, True, {}),
    "random_over": (random_over, True, True, {}),
    "smote": (smote, True, True, {}),
    "smote_nc": (smote_nc, True, True, {}),
    "adasyn": (adasyn, True, True, {}),
    "borderline_smote": (borderline_smote, True, True, {}),
    "kmeans_smote": (kmeans_smote, True, True, {}),
    "svm_smote": (svm_smote, True, True, {}),
    "smote_enn": (smote_enn, True, True, {}),
    "smote_tomek": (smote_tomek, True, True, {}),
}

ORACLE_METHODS = tuple(_ORACLES)


def oracle_for(name: str):
    """Reference resampler ``(dataset, rng, ratio=0.1, **params) -> ResampleOutput``."""
    try:
        fn, takes_ratio, takes_rng, fixed = _ORACLES[name]
    except KeyError:
        raise UnknownMethod(f"no oracle for {name!r}") from None

    def run(dataset: Dataset, rng, ratio: float = 0.1, **params) -> ResampleOutput:
        _check_size(dataset)
        kwargs = {**fixed, **params}
        if takes_ratio:
            kwargs["ratio"] = ratio
        if takes_rng:
            kwargs["rng"] = as_rng(rng)
        return fn(dataset, **kwargs)

    run.__name__ = f"oracle_{name}"
    return run


__all__ = ["oracle_for", "ORACLE_METHODS", "SIZE_CAP", "OracleTooLarge", "UnknownMethod", "AlreadySatisfied"]
