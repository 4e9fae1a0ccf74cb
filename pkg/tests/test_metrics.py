import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imbresample.metrics import (
    BaselineZero,
    LengthMismatch,
    MetricsReport,
    NoPositives,
    binary_metrics,
    delta_report,
    format_delta_table,
    percent_delta,
    pr_auc,
    write_reports,
)


def test_perfect_classifier():
    m = binary_metrics([1.0, 0.0, 1.0, 0.0], [1, 0, 1, 0])
    assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)


def test_all_negative_predictions():
    m = binary_metrics([0.1, 0.2, 0.3], [1, 0, 1])
    assert m.recall == 0.0 and m.precision == 0.0
    assert m.precision_undefined and not m.recall_undefined


def test_hand_confusion_counts():
    m = binary_metrics([0.9, 0.8, 0.1], [1, 0, 1], 0.5)
    assert (m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5)


def test_hand_average_precision():
    assert pr_auc([0.9, 0.8, 0.1], [1, 0, 1]) == 5 / 6
    assert pr_auc([0.9, 0.1, 0.5], [1, 0, 1]) == 1.0


def exhaustive_ap(scores, labels):
    """Sum over distinct thresholds (descending) of recall gain times precision, exactly."""
    n_pos = sum(labels)
    total, prev_tp = Fraction(0), 0
    for t in sorted(set(scores), reverse=True):
        sel = [y for s, y in zip(scores, labels) if s >= t]
        tp = sum(sel)
        total += Fraction(tp - prev_tp, n_pos) * Fraction(tp, len(sel))
        prev_tp = tp
    return float(total)


@given(st.integers(0, 10_000))
def test_ap_matches_exhaustive_oracle(seed):
    r = np.random.default_rng(seed)
    scores = np.round(r.random(50), int(r.integers(1, 4))).tolist()
    labels = (r.random(50) < 0.3).astype(int).tolist()
    labels[int(r.integers(50))] = 1
    assert abs(pr_auc(scores, labels) - exhaustive_ap(scores, labels)) <= 1e-12


@given(st.integers(0, 10_000))
def test_ap_monotone_invariance(seed):
    r = np.random.default_rng(seed)
    scores = np.round(r.random(40), 2)
    labels = (r.random(40) < 0.4).astype(int)
    labels[0] = 1
    assert pr_auc(scores, labels) == pr_auc(np.exp(3 * scores) - 7, labels)


@given(st.integers(0, 10_000))
def test_threshold_zero_recalls_everything(seed):
    r = np.random.default_rng(seed)
    labels = (r.random(30) < 0.5).astype(int)
    labels[0] = 1
    assert binary_metrics(r.random(30), labels, 0.0).recall == 1.0


def test_errors():
    with pytest.raises(LengthMismatch):
        binary_metrics([0.1, 0.2], [1])
    with pytest.raises(NoPositives):
        pr_auc([0.1, 0.2], [0, 0])
    with pytest.raises(BaselineZero):
        percent_delta(0.0, 0.3)


def report(name, values):
    rep = MetricsReport(name)
    for seed, v in enumerate(values):
        rep.add(seed, {"pr_auc": v, "precision": v, "recall": v, "f1": v})
    return rep


def test_percent_deltas():
    assert percent_delta(0.50, 0.465) == -7
    assert percent_delta(0.2, 0.2) == 0
    # exact halves (12.5%) round away from zero
    assert percent_delta(1.0, 1.125) == 13
    assert percent_delta(1.0, 0.875) == -13
    rows = delta_report(report("none", [0.5]), [report("same", [0.5]), report("lower", [0.465])])
    assert rows[0] == {"name": "same", "pr_auc": 0, "precision": 0, "recall": 0, "f1": 0}
    assert rows[1]["pr_auc"] == -7
    table = format_delta_table(rows)
    assert "-7%" in table and "+0%" in table


@given(st.lists(st.floats(0, 1), min_size=1, max_size=10))
def test_seed_average(values):
    rep = report("x", values)
    assert abs(rep.means["f1"] - sum(values) / len(values)) <= 1e-12


def test_write_reports(tmp_path):
    doc = write_reports(tmp_path, report("none", [0.5, 0.6]), [report("random_under", [0.4, 0.5])])
    back = json.loads((tmp_path / "metrics.json").read_text())
    assert back == json.loads(json.dumps(doc))
    assert back["deltas_percent"][0]["recall"] == -18
    assert (tmp_path / "deltas.txt").read_text().splitlines()[2].startswith("random_under")
    assert math.isclose(back["baseline"]["means"]["pr_auc"], 0.55)
