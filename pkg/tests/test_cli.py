import csv
import json

import numpy as np
import pytest
import yaml

from lassolev import experiments
from lassolev.cli import main
from lassolev.dataset import Dataset, write_csv
from lassolev.experiments import RunConfig, run_realdata, run_simulation, run_sweep
from lassolev.subdata import KTooLarge

SMALL = {
    "sim": {"n": 2000, "p": 20, "p1": 3, "n_test": 200},
    "varsel": {"n1": 5, "n2": 10, "s": 200, "p_s": 4},
    "subdata": {"k": 100},
    "replications": 2,
}


def _config(tmp_path, **overrides):
    doc = {**SMALL, **overrides}
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_outputs(tmp_path, capsys):
    out = tmp_path / "sim"
    main(["simulate", "--config", str(_config(tmp_path)), "--seed", "3", "--out", str(out),
          "--methods", "algorithm1,fulldata_lasso"])
    rows = _rows(out / "results.csv")
    assert list(rows[0]) == list(experiments.RESULT_COLUMNS)
    assert {r["method"] for r in rows} == {"algorithm1", "fulldata_lasso"}
    assert {r["replicate"] for r in rows} == {"0", "1"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["methods"]["algorithm1"]["n_ok"] == 2 and summary["methods"]["algorithm1"]["n_failed"] == 0
    assert "mean_seconds" in summary["methods"]["algorithm1"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3
    assert json.loads(capsys.readouterr().out) == summary


def test_simulate_noiseless_single_replicate(tmp_path):
    rc = RunConfig.from_dict({**SMALL, "replications": 1,
                              "sim": {**SMALL["sim"], "sigma2": 0.0}})
    out = run_simulation(rc)
    assert out.summary["methods"]["algorithm1"]["mean_mse"] <= 1e-10


def test_simulate_deterministic_across_workers(tmp_path):
    cfg = _config(tmp_path)
    outs = []
    for name, workers in (("a", 1), ("b", 2)):
        d = tmp_path / name
        main(["simulate", "--config", str(cfg), "--seed", "5", "--out", str(d),
              "--workers", str(workers), "--no-timings"])
        outs.append(d)
    c = tmp_path / "c"
    main(["simulate", "--config", str(outs[0] / "manifest.json"), "--out", str(c)])
    outs.append(c)
    for fname in ("results.csv", "summary.json", "manifest.json"):
        blobs = {(d / fname).read_bytes() for d in outs}
        assert len(blobs) == 1, fname


def test_sweep_single_cell_matches_simulation():
    rc = RunConfig.from_dict({**SMALL, "mode": "sweep", "sweep": {"n1": [5], "n2": [10], "p_s": [4]},
                              "timings": False})
    text, summary = run_sweep(rc)
    sim = run_simulation(RunConfig.from_dict({**SMALL, "timings": False}))
    lines = text.strip().split("\n")
    assert lines[0] == "n1,n2,p_s," + ",".join(experiments.RESULT_COLUMNS)
    stripped = [line.split(",", 3)[3] for line in lines[1:]]
    assert stripped == sim.csv_text().strip().split("\n")[1:]
    assert len(summary["cells"]) == 1


def test_sweep_fractional_p_s_label():
    rc = RunConfig.from_dict({**SMALL, "mode": "sweep", "replications": 1,
                              "sweep": {"n1": [5], "n2": [10], "p_s": ["0.1p"]}})
    _, summary = run_sweep(rc)
    assert summary["cells"][0]["p_s"] == 2


def test_realdata_constant_response_closed_form(tmp_path):
    g = np.random.default_rng(1)
    train = Dataset(g.standard_normal((600, 5)), np.full(600, 2.0))
    test_y = 2.0 + g.standard_normal(50)
    test_y += 2.0 - test_y.mean()
    test = Dataset(g.standard_normal((50, 5)), test_y)
    rc = RunConfig.from_dict({**SMALL, "mode": "realdata", "realdata": {"B": 3},
                              "methods": ["algorithm1", "fulldata_lasso"]})
    text, summary = run_realdata(rc, train, test)
    rows = list(csv.DictReader(text.splitlines()))
    assert len(rows) == 6
    expected = np.mean((test_y - 2.0) ** 2)
    assert expected == pytest.approx(test_y.var(), rel=1e-12)
    for r in rows:
        assert float(r["mspe"]) == pytest.approx(expected, rel=1e-12)


def test_realdata_cli_reproducible(tmp_path):
    g = np.random.default_rng(2)
    X = g.standard_normal((700, 6))
    y = X[:, 0] - X[:, 1] + g.standard_normal(700)
    write_csv(tmp_path / "train.csv", X[:500], y[:500])
    write_csv(tmp_path / "test.csv", X[500:], y[500:])
    cfg = _config(tmp_path)
    blobs = []
    for name in ("r1", "r2"):
        main(["realdata", "--config", str(cfg), "--train", str(tmp_path / "train.csv"),
              "--test", str(tmp_path / "test.csv"), "--B", "2", "--seed", "9",
              "--out", str(tmp_path / name)])
        blobs.append((tmp_path / name / "mspe.csv").read_bytes())
    assert blobs[0] == blobs[1]
    assert len(blobs[0].decode().strip().split("\n")) == 3


def _noiseless_csv(tmp_path, n=3000, p=10):
    g = np.random.default_rng(3)
    X = g.standard_normal((n, p))
    y = 2.0 + 1.5 * X[:, 1] - 0.5 * X[:, 4]
    path = tmp_path / "data.csv"
    write_csv(path, X, y)
    return path


def test_fit_noiseless_exact(tmp_path, capsys):
    data = _noiseless_csv(tmp_path)
    out = tmp_path / "fit"
    main(["fit", "--config", str(_config(tmp_path)), "--data", str(data), "--out", str(out)])
    model = json.loads((out / "model.json").read_text())
    assert model["active"] == [1, 4]
    assert np.allclose(model["slopes"], [1.5, -0.5], atol=1e-10)
    assert model["intercept"] == pytest.approx(2.0, abs=1e-10)
    assert model["meta"]["active_names"] == ["x2", "x5"]
    assert json.loads(capsys.readouterr().out) == model


def test_fit_iboss_selector(tmp_path):
    data = _noiseless_csv(tmp_path)
    out = tmp_path / "fit"
    main(["fit", "--config", str(_config(tmp_path)), "--data", str(data), "--out", str(out),
          "--selector", "iboss"])
    model = json.loads((out / "model.json").read_text())
    assert model["meta"]["selector"] == "IBOSS"


def test_fit_k_too_large_fails_before_fitting(tmp_path, monkeypatch):
    data = _noiseless_csv(tmp_path, n=300)

    def forbidden(*args, **kwargs):
        raise AssertionError("variable selection ran")

    monkeypatch.setattr("lassolev.methods.select_variables", forbidden)
    with pytest.raises(KTooLarge):
        main(["fit", "--config", str(_config(tmp_path)), "--data", str(data),
              "--out", str(tmp_path / "f"), "--k", "301"])


def test_fit_rerun_byte_identical(tmp_path):
    data = _noiseless_csv(tmp_path)
    blobs = []
    for name in ("f1", "f2"):
        main(["fit", "--config", str(_config(tmp_path)), "--data", str(data),
              "--out", str(tmp_path / name), "--seed", "4", "--no-timings"])
        blobs.append((tmp_path / name / "model.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_fraction_k_resolution():
    from lassolev.methods import resolve_k

    assert resolve_k("0.1n", 52_397) == 5240
    assert resolve_k("0.1n", 20_000) == 2000
    assert resolve_k(1000, 10_000) == 1000
    with pytest.raises(KTooLarge):
        resolve_k(11, 10)


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        RunConfig.from_dict({"methods": "algorithm1,magic"})
