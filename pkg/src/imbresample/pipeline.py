"""Seed-averaged evaluation: split -> encode -> resample (train only) -> boost -> score."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boosting import GbdtModel, OrderedTargetEncoder, gbdt_fit, ordered_encode
from .core import Dataset, ResampleError, SeededRng
from .metrics import MetricsReport, evaluate_scores
from .registry import run_method

THREADS_ENV = "IMBRESAMPLE_THREADS"


class PipelineAborted(ResampleError):
    def __init__(self, message, completed: dict):
        super().__init__(message)
        self.completed = completed


@dataclass
class PipelineConfig:
    split: float = 2 / 3
    ratio: float = 0.1
    seeds: tuple = tuple(range(10))
    threshold: float = 0.5
    smoothing: float = 1.0
    model: dict = field(
        default_factory=lambda: {"m": 200, "learning_rate": 0.1, "max_depth": 6, "min_samples_leaf": 20}
    )
    method_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.split < 1):
            raise ValueError("split fraction must be in (0, 1)")
        if not self.seeds:
            raise ValueError("seed list must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be unique")


@dataclass(eq=False)
class SeedRun:
    seed: int
    method: str
    encoder: OrderedTargetEncoder
    train: Dataset
    resampled: Dataset
    model: GbdtModel
    scores: np.ndarray
    metrics: dict


def stratified_split(labels, train_fraction: float, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
    """Per class (label 0 then 1): shuffle and send the first round(f * n_c) rows to train."""
    labels = np.asarray(labels)
    train, valid = [], []
    for value in (0, 1):
        rows = rng.shuffle(np.flatnonzero(labels == value))
        cut = int(round(train_fraction * len(rows)))
        train.append(rows[:cut])
        valid.append(rows[cut:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(valid))


def seed_streams(seed: int) -> dict:
    master = SeededRng(seed)
    return {name: master.derive(i) for i, name in enumerate(("split", "encoder", "resampler", "model"), 1)}


def split_dataset(dataset: Dataset, seed: int, config: PipelineConfig) -> tuple[Dataset, Dataset]:
    train_idx, valid_idx = stratified_split(dataset.labels, config.split, seed_streams(seed)["split"])
    return dataset.take(train_idx), dataset.take(valid_idx)


def run_seed(train: Dataset, valid: Dataset, method: str, seed: int, config: PipelineConfig) -> SeedRun:
    """Everything trained here sees ``train`` only; ``valid`` is scored at the end."""
    streams = seed_streams(seed)
    enc_train, encoder = ordered_encode(train, streams["encoder"], config.smoothing)
    enc_valid = encoder.transform(valid)
    out = run_method(method, enc_train, streams["resampler"], config.ratio, **config.method_params.get(method, {}))
    resampled = out.apply(enc_train)
    model = gbdt_fit(resampled, **config.model, rng=streams["model"])
    scores = model.score(enc_valid)
    metrics = evaluate_scores(np.clip(scores, 0.0, 1.0), valid.labels, config.threshold)
    return SeedRun(seed, method, encoder, enc_train, resampled, model, scores, metrics)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def evaluate(dataset: Dataset, methods, config: PipelineConfig, *, progress=None) -> tuple[MetricsReport, list]:
    """Baseline ("none") plus each method, averaged over ``config.seeds``.

    Every setting uses the same per-seed split and encoding. A failing seed
    aborts the run with :class:`PipelineAborted`, which carries the reports of
    the seeds that did complete. Asking for "none" as a treatment reuses the
    baseline runs, giving an identity row.
    """
    methods = list(dict.fromkeys(methods))
    names = ["none"] + [m for m in methods if m != "none"]
    reports = {name: MetricsReport(name, threshold=config.threshold) for name in names}

    def one_seed(seed):
        train, valid = split_dataset(dataset, seed, config)
        results = {}
        for name in names:
            results[name] = run_seed(train, valid, name, seed, config).metrics
            if progress:
                progress(seed, name, results[name])
        return seed, results

    completed = {}
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        futures = [pool.submit(one_seed, seed) for seed in config.seeds]
        error = None
        for fut in futures:
            try:
                seed, results = fut.result()
                completed[seed] = results
            except Exception as err:  # noqa: BLE001 - reported with partial results
                error = error or err
    for seed in config.seeds:
        if seed in completed:
            for name in names:
                reports[name].add(seed, completed[seed][name])
    if error is not None:
        raise PipelineAborted(f"evaluation aborted: {error}", {n: r for n, r in reports.items()}) from error
    return reports["none"], [reports[n] for n in methods]
