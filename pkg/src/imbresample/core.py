"""Data model, class partitioning, ratio arithmetic, seeded randomness, CSV I/O.

The label convention is fixed: 1 is the minority (fraud) class, 0 the
majority (regular) class.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_DERIVE = 0xD1B54A32D192ED03
_INV_2_53 = 2.0 ** -53


class ResampleError(Exception):
    """Base class for all typed failures raised by this package."""


class DataError(ResampleError):
    """Input data violates a contract (schema, parse, class presence)."""


class EmptyClass(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.row = row
        self.column = column


class AlreadySatisfied(ResampleError):
    """The requested ratio would not move class counts in the required direction."""


class KTooLarge(ResampleError):
    pass


class CategoricalUnsupported(ResampleError):
    pass


class DegenerateSignal(ResampleError):
    """A method has nothing to work with (no boundary, no danger rows, ...).

    Callers may fall back to plain SMOTE when the method allows it.
    """


# --------------------------------------------------------------------------
# randomness


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _swap_prefix(values, offsets):  # pragma: no cover - compiled
    for i in range(offsets.shape[0]):
        j = i + offsets[i]
        t = values[i]
        values[i] = values[j]
        values[j] = t


class SeededRng:
    """SplitMix64 stream with a portable definition.

    The k-th output (k = 1, 2, ...) is ``mix64(seed + k * GAMMA mod 2**64)``
    with the standard SplitMix64 finalizer. Derived values:

    * ``random``: ``(u >> 11) * 2**-53``, a double in [0, 1).
    * ``below(b)``: ``min(floor(random * b), b - 1)``.

    Array draws consume the stream in element order, so drawing ``n`` values
    at once is identical to drawing them one at a time.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.counter = 0

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, counter={self.counter})"

    def derive(self, key: int) -> "SeededRng":
        """Independent child stream; depends only on (seed, key), not on usage."""
        return SeededRng(_mix64(_mix64(self.seed) ^ ((int(key) * _DERIVE) & MASK64)))

    # scalar draws
    def next_u64(self) -> int:
        self.counter += 1
        return _mix64((self.seed + self.counter * GAMMA) & MASK64)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def randbelow(self, bound: int) -> int:
        if bound < 1:
            raise ValueError("bound must be >= 1")
        return min(int(self.uniform() * bound), bound - 1)

    # array draws
    def u64_array(self, n: int) -> np.ndarray:
        steps = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        state = np.uint64(self.seed) + steps * np.uint64(GAMMA)
        return _mix64_array(state)

    def random(self, n: int) -> np.ndarray:
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def below(self, bound, n: int | None = None) -> np.ndarray:
        """Integers in [0, bound); ``bound`` may be a scalar or an array."""
        bound_arr = np.asarray(bound, dtype=np.int64)
        if n is None:
            n = bound_arr.size
        if np.any(bound_arr < 1):
            raise ValueError("bound must be >= 1")
        draws = np.floor(self.random(n) * bound_arr.astype(np.float64)).astype(np.int64)
        return np.minimum(draws, bound_arr - 1)

    def shuffle(self, items: np.ndarray) -> np.ndarray:
        """Fisher-Yates from the front: swap position i with i + below(n - i)."""
        out = np.array(items, copy=True)
        n = len(out)
        if n < 2:
            return out
        positions = np.arange(n, dtype=np.int64)
        _swap_prefix(positions, self.below(np.arange(n - 1, 0, -1) + 1))
        return out[positions]

    def sample(self, n: int, k: int) -> np.ndarray:
        """k distinct integers from range(n), in draw order (partial Fisher-Yates)."""
        if k > n:
            raise ValueError(f"cannot sample {k} of {n}")
        if k == 0:
            return np.empty(0, dtype=np.int64)
        offsets = self.below(n - np.arange(k))
        if n <= max(1 << 20, 16 * k):
            pool = np.arange(n, dtype=np.int64)
            _swap_prefix(pool, offsets)
            return pool[:k].copy()
        # sparse variant for k << n: same swaps recorded in a dict
        offsets = offsets.tolist()
        swapped: dict[int, int] = {}
        out = np.empty(k, dtype=np.int64)
        for i, off in enumerate(offsets):
            j = i + off
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            out[i] = vj
            swapped[j] = vi
        return out


def as_rng(rng: "SeededRng | int | None") -> SeededRng:
    if isinstance(rng, SeededRng):
        return rng
    return SeededRng(0 if rng is None else rng)


# --------------------------------------------------------------------------
# data model


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable columnar table with binary labels."""

    numeric: np.ndarray
    categorical: np.ndarray
    labels: np.ndarray
    numeric_names: tuple[str, ...] = ()
    categorical_names: tuple[str, ...] = ()
    categories: tuple[tuple[str, ...], ...] = ()
    label_name: str = "label"

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64).reshape(-1)
        n = labels.shape[0]
        numeric = np.ascontiguousarray(self.numeric, dtype=np.float64).reshape(n, -1)
        categorical = np.ascontiguousarray(self.categorical, dtype=np.int64).reshape(n, -1)
        numeric_names = tuple(self.numeric_names) or tuple(f"x{j}" for j in range(numeric.shape[1]))
        categorical_names = tuple(self.categorical_names) or tuple(
            f"c{j}" for j in range(categorical.shape[1])
        )
        categories = tuple(tuple(c) for c in self.categories)
        if not categories and categorical.shape[1]:
            card = categorical.max(axis=0) + 1 if n else np.zeros(categorical.shape[1], int)
            categories = tuple(tuple(str(v) for v in range(int(c))) for c in card)
        if len(numeric_names) != numeric.shape[1] or len(categorical_names) != categorical.shape[1]:
            raise SchemaMismatch("column names do not match column counts")
        if len(categories) != categorical.shape[1]:
            raise SchemaMismatch("one category dictionary per categorical column required")
        if np.any((labels != 0) & (labels != 1)):
            raise DataError("labels must be 0 or 1")
        for j, dictionary in enumerate(categories):
            col = categorical[:, j]
            if n and (col.min() < 0 or col.max() >= len(dictionary)):
                raise DataError(f"category codes out of range in column {categorical_names[j]!r}")
        for arr in (labels, numeric, categorical):
            arr.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "numeric", numeric)
        object.__setattr__(self, "categorical", categorical)
        object.__setattr__(self, "numeric_names", numeric_names)
        object.__setattr__(self, "categorical_names", categorical_names)
        object.__setattr__(self, "categories", categories)

    @property
    def n_rows(self) -> int:
        return self.labels.shape[0]

    @property
    def n_numeric(self) -> int:
        return self.numeric.shape[1]

    @property
    def n_categorical(self) -> int:
        return self.categorical.shape[1]

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return self.with_arrays(self.numeric[idx], self.categorical[idx], self.labels[idx])

    def with_arrays(self, numeric, categorical, labels) -> "Dataset":
        return Dataset(
            numeric,
            categorical,
            labels,
            self.numeric_names,
            self.categorical_names,
            self.categories,
            self.label_name,
        )

    def with_labels(self, labels) -> "Dataset":
        return self.with_arrays(self.numeric, self.categorical, labels)

    def same_as(self, other: "Dataset") -> bool:
        """Bit-level equality of values, codes, labels, and schema."""
        return (
            self.numeric_names == other.numeric_names
            and self.categorical_names == other.categorical_names
            and self.categories == other.categories
            and np.array_equal(self.labels, other.labels)
            and self.numeric.shape == other.numeric.shape
            and self.numeric.tobytes() == other.numeric.tobytes()
            and np.array_equal(self.categorical, other.categorical)
        )


@dataclass(frozen=True)
class SamplingStrategy:
    """Target N_minority / N_majority after resampling."""

    target_ratio: float = 0.1

    def __post_init__(self):
        if not (0 < self.target_ratio <= 1):
            raise ValueError(f"target_ratio must be in (0, 1], got {self.target_ratio}")


@dataclass(eq=False)
class ResampleOutput:
    """Which original rows survive plus any generated rows.

    ``synthetic_*`` arrays hold generated rows in generation order. For each
    generated row ``provenance_base`` / ``provenance_neighbor`` are original
    row indices (-1 when not applicable) and ``provenance_lambda`` is the
    interpolation coefficient.
    """

    kept_indices: np.ndarray
    synthetic_numeric: np.ndarray
    synthetic_categorical: np.ndarray
    synthetic_labels: np.ndarray
    provenance_base: np.ndarray
    provenance_neighbor: np.ndarray
    provenance_lambda: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def n_synthetic(self) -> int:
        return self.synthetic_labels.shape[0]

    @classmethod
    def keep_only(cls, dataset: Dataset, kept, info: dict | None = None) -> "ResampleOutput":
        kept = np.unique(np.asarray(kept, dtype=np.int64))
        return cls(
            kept,
            np.empty((0, dataset.n_numeric)),
            np.empty((0, dataset.n_categorical), dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0),
            info or {},
        )

    def apply(self, dataset: Dataset) -> Dataset:
        """Materialize: kept rows in index order, then synthetic rows."""
        numeric = np.vstack([dataset.numeric[self.kept_indices], self.synthetic_numeric])
        categorical = np.vstack([dataset.categorical[self.kept_indices], self.synthetic_categorical])
        labels = np.concatenate([dataset.labels[self.kept_indices], self.synthetic_labels])
        return dataset.with_arrays(numeric, categorical, labels)

    def same_as(self, other: "ResampleOutput") -> bool:
        def eq(a, b):
            a, b = np.asarray(a), np.asarray(b)
            return a.shape == b.shape and a.dtype.kind == b.dtype.kind and a.tobytes() == b.tobytes()

        return all(
            eq(getattr(self, name), getattr(other, name))
            for name in (
                "kept_indices",
                "synthetic_numeric",
                "synthetic_categorical",
                "synthetic_labels",
                "provenance_base",
                "provenance_neighbor",
                "provenance_lambda",
            )
        )


def class_partition(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """(minority_indices, majority_indices); on a tie label 1 is the minority."""
    labels = dataset.labels
    ones = np.flatnonzero(labels == 1)
    zeros = np.flatnonzero(labels == 0)
    if len(ones) == 0 or len(zeros) == 0:
        raise EmptyClass("both classes need at least one row")
    if len(ones) <= len(zeros):
        return ones, zeros
    return zeros, ones


def minority_label(dataset: Dataset) -> int:
    minority, _ = class_partition(dataset)
    return int(dataset.labels[minority[0]])


def _exact_ratio(ratio: float) -> Fraction:
    # decimal reading so that e.g. 0.29 * 100 is 29, not 28.999...
    return Fraction(repr(float(ratio)))


def resolve_counts(strategy: SamplingStrategy | float, n_min: int, n_maj: int, direction: str) -> int:
    """Post-resample class count implied by the target ratio.

    ``under`` returns the majority count floor(n_min / ratio), ``over`` the
    minority count floor(n_maj * ratio). A target equal to the current count
    is a no-op and is returned as-is.
    """
    ratio = strategy.target_ratio if isinstance(strategy, SamplingStrategy) else float(strategy)
    if not (0 < ratio <= 1):
        raise ValueError(f"target_ratio must be in (0, 1], got {ratio}")
    if n_min < 1 or n_maj < 1:
        raise EmptyClass("both classes need at least one row")
    r = _exact_ratio(ratio)
    if direction == "under":
        target = math.floor(Fraction(n_min) / r)
        if target > n_maj:
            raise AlreadySatisfied(f"majority target {target} exceeds current {n_maj}")
        return target
    if direction == "over":
        target = math.floor(Fraction(n_maj) * r)
        if target < n_min:
            raise AlreadySatisfied(f"minority target {target} below current {n_min}")
        return target
    raise ValueError(f"direction must be 'under' or 'over', got {direction!r}")


def standardize(numeric: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-column z-scores using sequentially accumulated mean and std.

    Zero-variance columns are scaled by 1. Sums run in row order so any
    loop-based reimplementation gets the same bits.
    """
    n = numeric.shape[0]
    if n == 0 or numeric.shape[1] == 0:
        return numeric.copy(), np.zeros(numeric.shape[1]), np.ones(numeric.shape[1])
    mean = np.cumsum(numeric, axis=0)[-1] / n
    centered = numeric - mean
    var = np.cumsum(centered * centered, axis=0)[-1] / n
    std = np.sqrt(var)
    std[std == 0] = 1.0
    return centered / std, mean, std


# --------------------------------------------------------------------------
# CSV


ROLES = ("numeric", "categorical", "label")


def read_csv_dataset(path: str | Path, schema: Mapping[str, str]) -> Dataset:
    """Load a CSV with a header row; ``schema`` maps every column to a role."""
    for name, role in schema.items():
        if role not in ROLES:
            raise SchemaMismatch(f"unknown role {role!r} for column {name!r}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch("empty file: header row required") from None
        if set(header) != set(schema) or len(header) != len(schema):
            raise SchemaMismatch(f"header {header} does not match schema columns {sorted(schema)}")
        label_cols = [h for h in header if schema[h] == "label"]
        if len(label_cols) != 1:
            raise SchemaMismatch("exactly one label column required")
        num_cols = [h for h in header if schema[h] == "numeric"]
        cat_cols = [h for h in header if schema[h] == "categorical"]
        pos = {h: i for i, h in enumerate(header)}
        numeric, codes, labels = [], [], []
        dictionaries: list[dict[str, int]] = [{} for _ in cat_cols]
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=row_no)
            values = []
            for name in num_cols:
                raw = row[pos[name]]
                try:
                    v = float(raw)
                except ValueError:
                    raise ParseError(f"not a number: {raw!r}", row=row_no, column=name) from None
                if math.isnan(v):
                    raise ParseError("NaN values are not supported", row=row_no, column=name)
                values.append(v)
            numeric.append(values)
            row_codes = []
            for d, name in zip(dictionaries, cat_cols):
                row_codes.append(d.setdefault(row[pos[name]], len(d)))
            codes.append(row_codes)
            raw = row[pos[label_cols[0]]].strip()
            if raw not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {raw!r}", row=row_no, column=label_cols[0])
            labels.append(int(raw))
    n = len(labels)
    return Dataset(
        np.array(numeric, dtype=np.float64).reshape(n, len(num_cols)),
        np.array(codes, dtype=np.int64).reshape(n, len(cat_cols)),
        np.array(labels, dtype=np.int64),
        tuple(num_cols),
        tuple(cat_cols),
        tuple(tuple(d) for d in dictionaries),
        label_cols[0],
    )


def dataset_schema(dataset: Dataset) -> dict[str, str]:
    schema = {name: "numeric" for name in dataset.numeric_names}
    schema.update({name: "categorical" for name in dataset.categorical_names})
    schema[dataset.label_name] = "label"
    return schema


def write_csv_dataset(dataset: Dataset, path: str | Path) -> None:
    """Numeric values are written with ``repr`` so a reload is bit-exact."""
    header = list(dataset.numeric_names) + list(dataset.categorical_names) + [dataset.label_name]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(dataset.n_rows):
            row = [repr(float(v)) for v in dataset.numeric[i]]
            row += [dataset.categories[j][c] for j, c in enumerate(dataset.categorical[i])]
            row.append(str(int(dataset.labels[i])))
            writer.writerow(row)


def parse_schema(text: str | Iterable[str]) -> dict[str, str]:
    """Parse ``name:role,name:role`` (or an iterable of ``name:role``)."""
    items = text.split(",") if isinstance(text, str) else list(text)
    schema = {}
    for item in items:
        item = item.strip()
        if not item:
            continue
        name, sep, role = item.rpartition(":")
        if not sep or role not in ROLES:
            raise SchemaMismatch(f"bad schema entry {item!r}; expected name:role")
        schema[name] = role
    return schema
