import json
import time

import numpy as np
import pytest

from imbresample import cli
from imbresample.core import read_csv_dataset, parse_schema
from imbresample.synth import InvalidRatio, SynthConfig, make_dataset


def test_synth_forced_minority_count():
    ds = make_dataset(SynthConfig(n_rows=1000, fraud_ratio=0.01))
    assert ds.n_rows == 1000 and int(ds.labels.sum()) == 10


def test_synth_invalid_ratio():
    with pytest.raises(InvalidRatio):
        make_dataset(SynthConfig(fraud_ratio=0.6))


def synth(tmp_path, name="d.csv", *extra):
    path = tmp_path / name
    assert cli.main(["synth", "--rows", "2000", "--fraud-ratio", "0.05", "--out", str(path), *extra]) == 0
    return path


def test_synth_cli_byte_identical(tmp_path):
    a = synth(tmp_path, "a.csv", "--seed", "3")
    b = synth(tmp_path, "b.csv", "--seed", "3")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != synth(tmp_path, "c.csv", "--seed", "4").read_bytes()


def test_resample_random_under_ratio(tmp_path, capsys):
    data = synth(tmp_path)
    out = tmp_path / "r.csv"
    code = cli.main(["resample", "--data", str(data), "--method", "random_under", "--ratio", "0.1", "--out", str(out)])
    assert code == 0
    schema = parse_schema((tmp_path / "d.csv.schema").read_text().strip())
    res = read_csv_dataset(out, schema)
    n_min = int(res.labels.sum())
    n_maj = res.n_rows - n_min
    assert 0.1 <= n_min / n_maj <= 0.1 + 1 / n_maj
    assert "achieved ratio" in capsys.readouterr().out
    prov = json.loads((tmp_path / "r.csv.provenance.json").read_text())
    assert prov["output_rows"] == res.n_rows and prov["synthetic"]["count"] == 0


def test_resample_provenance_lambdas_exact(tmp_path):
    data = synth(tmp_path)
    out = tmp_path / "s.csv"
    assert cli.main(["resample", "--data", str(data), "--method", "smote", "--ratio", "0.1", "--out", str(out)]) == 0
    prov = json.loads((tmp_path / "s.csv.provenance.json").read_text())
    lam = [float.fromhex(v) for v in prov["synthetic"]["lambda"]]
    assert len(lam) == prov["synthetic"]["count"] > 0
    assert all(0.0 <= v < 1.0 for v in lam)


def test_exit_codes(tmp_path):
    data = synth(tmp_path)
    assert cli.main(["resample", "--data", str(data), "--method", "nope"]) == 2
    assert cli.main(["resample", "--data", str(tmp_path / "missing.csv"), "--schema", "a:numeric,y:label"]) == 3
    one = tmp_path / "one.csv"
    one.write_text("a,y\n" + "".join(f"{i},0\n" for i in range(30)) + "99,1\n")
    code = cli.main(["resample", "--data", str(one), "--schema", "a:numeric,y:label", "--method", "smote",
                     "--ratio", "0.5", "--out", str(tmp_path / "o.csv")])
    assert code == 3  # MinorityTooSmall is a data error
    code = cli.main(["resample", "--data", str(data), "--method", "random_under", "--ratio", "0.01",
                     "--out", str(tmp_path / "o.csv")])
    assert code == 4  # target already met
    assert cli.main(["frobnicate"]) == 2


def quadratic_dummy(dataset, rng):
    time.sleep(1e-8 * dataset.n_rows**2)


def test_bench_planted_quadratic(tmp_path, monkeypatch):
    data = synth(tmp_path)
    real = cli.resampler
    monkeypatch.setattr(cli, "resampler", lambda name, ratio, **kw: quadratic_dummy if name == "quad" else real(name, ratio, **kw))
    out = tmp_path / "bench"
    code = cli.main(["bench", "--data", str(data), "--methods", "quad,random_under", "--sizes", "250,500,1000,1500,2000",
                     "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "bench.json").read_text())
    quad, under = doc["methods"]
    assert quad["best"]["family"] == "polynomial"
    assert under["decision"] == "Accepted"
    assert "Resampling method" in (out / "bench.txt").read_text()


def test_bench_zero_budget_rejects(tmp_path):
    data = synth(tmp_path)
    out = tmp_path / "bench0"
    code = cli.main(["bench", "--data", str(data), "--methods", "random_under,random_over", "--budget", "0",
                     "--repetitions", "1", "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "bench.json").read_text())
    assert {m["decision"] for m in doc["methods"]} == {"Rejected"}
    assert len(doc["sizes"]) >= 4


EVAL = ["--seeds", "0,1", "--stages", "15", "--max-depth", "3"]


def test_evaluate_deterministic_and_identity(tmp_path, capsys):
    data = synth(tmp_path)
    for name in ("e1", "e2"):
        assert cli.main(["evaluate", "--data", str(data), "--methods", "none", *EVAL, "--out", str(tmp_path / name)]) == 0
    a = json.loads((tmp_path / "e1" / "metrics.json").read_text())
    b = json.loads((tmp_path / "e2" / "metrics.json").read_text())
    assert a == b
    assert a["deltas_percent"] == [{"name": "none", "pr_auc": 0, "precision": 0, "recall": 0, "f1": 0}]
    assert "+0%" in capsys.readouterr().out


def test_evaluate_unknown_method(tmp_path):
    data = synth(tmp_path)
    assert cli.main(["evaluate", "--data", str(data), "--methods", "bogus", *EVAL]) == 2
    assert cli.main(["evaluate", "--data", str(data), "--seeds", "1,1"]) == 2


def test_config_file_flags_win(tmp_path):
    data = synth(tmp_path)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# resample settings\ndata = {data}\nmethod = random_over\nratio = 0.3\nparam = \n")
    out = tmp_path / "c.csv"
    assert cli.main(["resample", "--config", str(cfg), "--ratio", "0.2", "--out", str(out)]) == 0
    prov = json.loads((tmp_path / "c.csv.provenance.json").read_text())
    assert prov["method"] == "random_over" and prov["ratio"] == 0.2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert cli.main(["resample", "--config", str(bad)]) == 2


def test_cli_module_entry_point(tmp_path):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "imbresample", "resample", "--method", "x"], capture_output=True, text=True)
    assert res.returncode == 2
