"""Threshold metrics, average precision, and percentage-delta reports."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal, localcontext
from pathlib import Path

import numpy as np

from .core import ResampleError

METRIC_NAMES = ("pr_auc", "precision", "recall", "f1")
COLUMN_TITLES = {"pr_auc": "PR AUC", "precision": "Precision", "recall": "Recall", "f1": "F1"}


class LengthMismatch(ValueError):
    pass


class NoPositives(ResampleError):
    pass


class BaselineZero(ResampleError):
    pass


@dataclass(frozen=True)
class ThresholdMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    precision_undefined: bool = False
    recall_undefined: bool = False


def _check(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise LengthMismatch(f"{scores.shape} scores vs {labels.shape} labels")
    if np.any((labels != 0) & (labels != 1)):
        raise ValueError("labels must be 0 or 1")
    return scores, labels.astype(np.int64)


def binary_metrics(scores, labels, threshold: float = 0.5) -> ThresholdMetrics:
    """Precision, recall and F1 of the rule ``score >= threshold``.

    A zero denominator gives 0 and sets the matching ``*_undefined`` flag.
    """
    scores, labels = _check(scores, labels)
    pred = scores >= threshold
    tp = int(np.sum(pred & (labels == 1)))
    fp = int(np.sum(pred & (labels == 0)))
    fn = int(np.sum(~pred & (labels == 1)))
    p_undef = tp + fp == 0
    r_undef = tp + fn == 0
    precision = 0.0 if p_undef else tp / (tp + fp)
    recall = 0.0 if r_undef else tp / (tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ThresholdMetrics(precision, recall, f1, tp, fp, fn, p_undef, r_undef)


def pr_auc(scores, labels) -> float:
    """Average precision: sum over score cuts of (recall gain) * (precision at the cut).

    The sum is accumulated in 60-digit decimal arithmetic and rounded once.

    Rows with equal scores form one cut, so the value does not depend on the
    order of tied rows.
    """
    scores, labels = _check(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise NoPositives("average precision needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y)
    fp = np.cumsum(1 - y)
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp_cut = tp[last]
    fp_cut = fp[last]
    gain = np.diff(np.r_[0, tp_cut])
    hits = np.flatnonzero(gain)
    # exact rational sum to 60 digits, one final rounding
    with localcontext() as ctx:
        ctx.prec = 60
        total = sum(
            (Decimal(int(gain[i])) * Decimal(int(tp_cut[i])) / Decimal(int(tp_cut[i] + fp_cut[i])) for i in hits),
            Decimal(0),
        )
        return float(total / n_pos)


@dataclass
class MetricsReport:
    """Per-seed metric records and their means for one resampling setting."""

    name: str
    seeds: list = field(default_factory=list)
    records: list = field(default_factory=list)
    threshold: float = 0.5

    def add(self, seed: int, record: dict) -> None:
        self.seeds.append(seed)
        self.records.append({k: float(record[k]) for k in METRIC_NAMES})

    @property
    def means(self) -> dict:
        if not self.records:
            raise ValueError(f"report {self.name!r} has no records")
        return {k: math.fsum(r[k] for r in self.records) / len(self.records) for k in METRIC_NAMES}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "threshold": self.threshold,
            "seeds": list(self.seeds),
            "records": self.records,
            "means": self.means,
        }


def evaluate_scores(scores, labels, threshold: float = 0.5) -> dict:
    m = binary_metrics(scores, labels, threshold)
    return {
        "pr_auc": pr_auc(scores, labels),
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
    }


def percent_delta(baseline: float, treatment: float) -> int:
    """Signed percentage change, rounded half away from zero."""
    if baseline == 0:
        raise BaselineZero("baseline mean is 0; percentage change undefined")
    raw = Decimal(repr(100.0 * (treatment - baseline) / baseline))
    return int(raw.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def delta_report(baseline: MetricsReport, treatments: list) -> list:
    """One row per treatment: {name, pr_auc, precision, recall, f1} as signed ints."""
    base = baseline.means
    rows = []
    for t in treatments:
        means = t.means
        rows.append({"name": t.name, **{k: percent_delta(base[k], means[k]) for k in METRIC_NAMES}})
    return rows


def format_delta_table(rows: list) -> str:
    """Plain-text table: method, then signed percentages per metric."""
    width = max([len(r["name"]) for r in rows] + [len("Method")])
    head = "Method".ljust(width) + "".join(f" | {COLUMN_TITLES[k]:>9}" for k in METRIC_NAMES)
    lines = [head, "-" * len(head)]
    for r in rows:
        cells = "".join(f" | {r[k]:>+8d}%" for k in METRIC_NAMES)
        lines.append(r["name"].ljust(width) + cells)
    return "\n".join(lines)


def write_reports(out_dir: str | Path, baseline: MetricsReport, treatments: list) -> dict:
    """Write ``metrics.json`` (raw values + deltas) and ``deltas.txt``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = delta_report(baseline, treatments)
    doc = {
        "threshold": baseline.threshold,
        "baseline": baseline.to_dict(),
        "treatments": [t.to_dict() for t in treatments],
        "deltas_percent": rows,
    }
    (out_dir / "metrics.json").write_text(json.dumps(doc, indent=2))
    (out_dir / "deltas.txt").write_text(format_delta_table(rows) + "\n")
    return doc
