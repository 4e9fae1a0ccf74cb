"""Runtime growth study: time a resampler on nested subsets, fit growth curves,
extrapolate to the full training size and gate against a wall-clock budget.
"""
from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DataError, Dataset, ResampleError, SeededRng, as_rng

FAMILIES = ("linear", "logarithmic", "polynomial", "exponential")
DEFAULT_SIZES = (1_000, 10_000, 100_000, 300_000, 1_000_000)
DEFAULT_TARGET_SIZE = 6_700_000
DEFAULT_BUDGET = 86_400.0
R2_TIE = 1e-10


class SubsetTooSmall(DataError):
    pass


class SizeTooLarge(SubsetTooSmall):
    pass


class DegenerateFit(ResampleError):
    pass


class AllFitsFailed(ResampleError):
    pass


@dataclass(frozen=True)
class TimingSample:
    subset_size: int
    wall_seconds: float
    repetitions: int = 1
    runs: tuple = ()


@dataclass
class GrowthModel:
    """t(n) for one family. Coefficients, highest power first:

    linear (a, b): a*n + b; logarithmic (a, b): a*ln(n) + b;
    polynomial (c_d, ..., c_0); exponential (a, b): exp(a*n + b).
    """

    family: str
    coefficients: tuple
    r2: float
    degree: int = 2

    def raw_predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        c = self.coefficients
        if self.family == "linear":
            return c[0] * n + c[1]
        if self.family == "logarithmic":
            return c[0] * np.log(n) + c[1]
        if self.family == "polynomial":
            return np.polyval(np.asarray(c), n)
        if self.family == "exponential":
            with np.errstate(over="ignore"):
                return np.exp(c[0] * n + c[1])
        raise ValueError(f"unknown family {self.family!r}")

    def predict(self, n) -> tuple[np.ndarray, bool]:
        """Predicted seconds, clamped at 0; the flag says whether clamping happened."""
        raw = self.raw_predict(n)
        return np.maximum(raw, 0.0), bool(np.any(raw < 0))


@dataclass
class FitResult:
    best: GrowthModel
    candidates: list
    failures: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GateDecision:
    method: str
    predicted_seconds: float
    budget_seconds: float
    decision: str
    target_size: int = DEFAULT_TARGET_SIZE
    family: str = ""
    safety_factor: float = 1.0
    clamped: bool = False

    @property
    def accepted(self) -> bool:
        return self.decision == "Accepted"


# --------------------------------------------------------------------------
# timing


def nested_subsets(labels, sizes, rng: SeededRng) -> list:
    """Stratified, nested row subsets, one per size (sizes must increase).

    Each class is shuffled once; a subset of size s takes the first
    round(s * class_share) rows of each class's permutation (the remainder
    going to the larger class), so smaller subsets sit inside larger ones.
    """
    labels = np.asarray(labels)
    n = len(labels)
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("subset sizes must be strictly increasing")
    if sizes and sizes[-1] > n:
        raise SizeTooLarge(f"subset size {sizes[-1]} exceeds {n} rows")
    ones = rng.shuffle(np.flatnonzero(labels == 1))
    zeros = rng.shuffle(np.flatnonzero(labels == 0))
    out = []
    for s in sizes:
        k1 = min(len(ones), int(round(s * len(ones) / n)))
        k0 = s - k1
        if k0 > len(zeros):
            k0, k1 = len(zeros), s - len(zeros)
        if k1 < 1 or k0 < 1:
            raise SubsetTooSmall(f"subset of size {s} lacks one of the classes")
        out.append(np.sort(np.concatenate([ones[:k1], zeros[:k0]])))
    return out


def time_on_subsets(
    resampler: Callable[[Dataset, SeededRng], object],
    dataset: Dataset,
    sizes,
    repetitions: int = 1,
    rng=None,
    clock: Callable[[], float] = time.perf_counter,
) -> list:
    """Median wall time of ``resampler(subset, rng)`` per subset size."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rng = as_rng(rng)
    subsets = nested_subsets(dataset.labels, sizes, rng.derive(0))
    samples = []
    for i, rows in enumerate(subsets):
        sub = dataset.take(rows)
        runs = []
        for r in range(repetitions):
            run_rng = rng.derive(1000 + i * repetitions + r)
            start = clock()
            resampler(sub, run_rng)
            runs.append(clock() - start)
        samples.append(TimingSample(len(rows), statistics.median(runs), repetitions, tuple(runs)))
    return samples


# --------------------------------------------------------------------------
# growth fitting


def _r2(t, pred) -> float:
    t = np.asarray(t, dtype=np.float64)
    ss_res = math.fsum(((t - pred) ** 2).tolist())
    ss_tot = math.fsum(((t - t.mean()) ** 2).tolist())
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else -math.inf
    return 1.0 - ss_res / ss_tot


def _lstsq(design, target):
    """Least squares with column scaling; raises DegenerateFit when rank-deficient."""
    scale = np.abs(design).max(axis=0)
    scale[scale == 0] = 1.0
    coef, _, rank, _ = np.linalg.lstsq(design / scale, target, rcond=None)
    if rank < design.shape[1]:
        raise DegenerateFit("singular design matrix")
    return coef / scale


def fit_family(family: str, sizes, times, degree: int = 2) -> GrowthModel:
    n = np.asarray(sizes, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    ones = np.ones_like(n)
    if family == "linear":
        coef = _lstsq(np.column_stack([n, ones]), t)
    elif family == "logarithmic":
        coef = _lstsq(np.column_stack([np.log(n), ones]), t)
    elif family == "polynomial":
        if len(n) <= degree:
            raise DegenerateFit(f"degree {degree} needs more than {degree} samples")
        # fit on n / n_max for conditioning, then rescale coefficients
        n_max = n.max()
        u = n / n_max
        coef_u = _lstsq(np.column_stack([u**p for p in range(degree, -1, -1)]), t)
        coef = coef_u / n_max ** np.arange(degree, -1, -1)
    elif family == "exponential":
        if np.any(t <= 0):
            raise DegenerateFit("exponential fit needs positive times")
        coef = _lstsq(np.column_stack([n, ones]), np.log(t))
    else:
        raise ValueError(f"unknown family {family!r}")
    model = GrowthModel(family, tuple(float(c) for c in coef), 0.0, degree)
    model.r2 = _r2(t, model.raw_predict(n))
    return model


def fit_growth_models(samples, degree: int = 2) -> FitResult:
    """Fit all four families; pick the highest R^2 measured on raw times.

    ``samples`` are TimingSample objects or (size, seconds) pairs.

    Families within ``R2_TIE`` of the best count as tied and the earliest in
    (linear, logarithmic, polynomial, exponential) wins.
    """
    pairs = [(s.subset_size, s.wall_seconds) if isinstance(s, TimingSample) else tuple(s) for s in samples]
    sizes = [p[0] for p in pairs]
    times = [p[1] for p in pairs]
    if len(set(sizes)) < 3:
        raise ValueError("at least 3 distinct subset sizes are required")
    if any(t <= 0 for t in times):
        raise ValueError("times must be positive")
    candidates, failures = [], {}
    for family in FAMILIES:
        try:
            candidates.append(fit_family(family, sizes, times, degree))
        except (DegenerateFit, np.linalg.LinAlgError, FloatingPointError) as err:
            failures[family] = str(err)
    candidates = [c for c in candidates if math.isfinite(c.r2)]
    if not candidates:
        raise AllFitsFailed(f"no growth family could be fitted: {failures}")
    top = max(c.r2 for c in candidates)
    best = next(c for c in candidates if c.r2 >= top - R2_TIE)
    return FitResult(best, candidates, failures)


def gate(
    model: GrowthModel,
    target_size: int = DEFAULT_TARGET_SIZE,
    budget_seconds: float = DEFAULT_BUDGET,
    method: str = "",
    safety_factor: float = 1.0,
) -> GateDecision:
    """Accept iff the extrapolated time (times ``safety_factor``) fits the budget."""
    pred, clamped = model.predict(target_size)
    seconds = float(pred) * safety_factor
    decision = "Accepted" if seconds <= budget_seconds else "Rejected"
    return GateDecision(method, seconds, budget_seconds, decision, target_size, model.family, safety_factor, clamped)


def humanize_seconds(seconds: float) -> str:
    """'>N weeks' from one week up, otherwise days/hours/minutes/seconds."""
    if not math.isfinite(seconds):
        return ">inf weeks"
    week = 7 * 86_400
    if seconds >= week:
        return f">{int(seconds // week)} weeks" if seconds >= 2 * week else ">1 week"
    total = int(round(seconds))
    parts = []
    for unit, size in (("day", 86_400), ("hour", 3_600), ("minute", 60), ("second", 1)):
        value, total = divmod(total, size)
        if value or (unit == "second" and not parts):
            parts.append(f"{value} {unit}{'s' if value != 1 else ''}")
    return ", ".join(parts)


def format_gate_table(decisions: list) -> str:
    """Method | predicted time | decision, like a tractability summary table."""
    rows = [(d.method, humanize_seconds(d.predicted_seconds), d.decision) for d in decisions]
    w0 = max([len(r[0]) for r in rows] + [len("Resampling method")])
    w1 = max([len(r[1]) for r in rows] + [len("Predicted computation time")])
    lines = [f"{'Resampling method':<{w0}} | {'Predicted computation time':<{w1}} | Decision"]
    lines.append("-" * len(lines[0]))
    lines += [f"{a:<{w0}} | {b:<{w1}} | {c}" for a, b, c in rows]
    if any(d.safety_factor != 1.0 for d in decisions):
        lines.append(f"(predictions include a x{decisions[0].safety_factor:g} safety factor)")
    return "\n".join(lines)
