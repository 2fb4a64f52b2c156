"""Acceptance criteria, each checked at its stated tolerance.

Every test appends one ``PASS``/``FAIL`` line to the session report printed
at the end of the run.  The three simulation studies are shared through
module-scoped fixtures.  Set ``LASSOLEV_BLOG_TRAIN`` and
``LASSOLEV_BLOG_TEST`` to BlogFeedback CSV paths to run the real-data
criterion; otherwise its synthetic stand-in runs.
"""
import os
import time

import numpy as np
import pytest

from lassolev.cli import main
from lassolev.dataset import Dataset, load_csv
from lassolev.experiments import RunConfig, run_realdata, run_simulation
from lassolev.lasso import lambda_grid, lasso_fit
from lassolev.linalg import leverage_scores, ols_fit
from lassolev.metrics import ExperimentResult
from lassolev.subdata import levss_select
from lassolev.varselect import kmeans_split, weighted_candidate_sample
from oracles import brute_force_split, brute_top_k, hat_diag, kkt_violation, lambda_max

DESK_SIM = {"n": 10_000, "p": 100, "p1": 10, "sigma2": 9.0, "dist": "normal", "n_test": 1000}
DESK_VARSEL = {"n1": 50, "n2": 100, "s": 1000, "p_s": 10}


def _record(report, number, title, ok, detail):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    report.append(line)
    print(line)
    return ok


def _simulate(sim, methods, seed, varsel=DESK_VARSEL, k=1000):
    rc = RunConfig.from_dict({
        "seed": seed,
        "replications": 20,
        "methods": list(methods),
        "sim": sim,
        "varsel": varsel,
        "subdata": {"k": k},
        "timings": False,
    })
    t0 = time.perf_counter()
    out = run_simulation(rc)
    return out, time.perf_counter() - t0


def _by_method(out, method):
    rows = [r for r in out.results if isinstance(r, ExperimentResult) and r.method == method]
    rows.sort(key=lambda r: r.replicate)
    assert len(rows) == 20, f"{method}: {20 - len(rows)} replicates failed"
    return rows


@pytest.fixture(scope="module")
def identity_study():
    return _simulate({**DESK_SIM, "cov": "identity"}, ["algorithm1"], seed=101)


@pytest.fixture(scope="module")
def correlated_study():
    return _simulate({**DESK_SIM, "cov": "equicorrelated"}, ["algorithm1", "fulldata_lasso"], seed=102)


@pytest.fixture(scope="module")
def prediction_study():
    sim = {**DESK_SIM, "n": 20_000, "dist": "t2", "cov": "equicorrelated"}
    return _simulate(sim, ["algorithm1", "onephase_baseline"], seed=103, k="0.1n")


def test_criterion_01_perfect_selection(identity_study, report):
    out, seconds = identity_study
    rows = _by_method(out, "algorithm1")
    power = np.mean([r.power for r in rows])
    error = np.mean([r.error for r in rows])
    ok = power >= 0.95 and error <= 0.01
    _record(report, 1, "perfect selection, identity design", ok,
            f"mean power {power:.4f} (>= 0.95), mean error {error:.4f} (<= 0.01), "
            f"{seconds:.0f} s for 20 replications")
    assert ok


def test_criterion_02_correlated_robustness(correlated_study, report):
    out, _ = correlated_study
    ours = _by_method(out, "algorithm1")
    full = _by_method(out, "fulldata_lasso")
    error = np.mean([r.error for r in ours])
    worse = sum(f.error > a.error for a, f in zip(ours, full))
    ok = error <= 0.01 and worse >= 15
    _record(report, 2, "correlated design", ok,
            f"algorithm1 mean error {error:.4f} (<= 0.01); full-data LASSO error strictly "
            f"larger in {worse}/20 replications (>= 15)")
    assert ok


def test_criterion_03_prediction_ordering(prediction_study, report):
    out, _ = prediction_study
    ours = _by_method(out, "algorithm1")
    base = _by_method(out, "onephase_baseline")
    wins = sum(a.mse <= b.mse for a, b in zip(ours, base))
    ok = wins >= 14
    _record(report, 3, "prediction ordering, t2 correlated", ok,
            f"algorithm1 MSE <= one-phase IBOSS baseline in {wins}/20 replications (>= 14); "
            f"means {np.mean([r.mse for r in ours]):.4f} vs {np.mean([r.mse for r in base]):.4f}")
    assert ok


def test_criterion_04_noiseless_exactness(report):
    worst = 0.0
    for i, (dist, cov) in enumerate([("normal", "identity"), ("lognormal", "identity"),
                                     ("t2", "equicorrelated"), ("mixture", "equicorrelated")]):
        rc = RunConfig.from_dict({
            "seed": 40 + i,
            "replications": 3,
            "sim": {"n": 5000, "p": 40, "p1": 5, "sigma2": 0.0, "dist": dist, "cov": cov,
                    "n_test": 500},
            "varsel": {"n1": 10, "n2": 20, "s": 500, "p_s": 8},
            "subdata": {"k": 500},
            "timings": False,
        })
        rows = [r for r in run_simulation(rc).results if isinstance(r, ExperimentResult)]
        assert len(rows) == 3
        worst = max(worst, max(r.mse for r in rows))
    ok = worst <= 1e-10
    _record(report, 4, "noiseless exactness", ok,
            f"largest MSE {worst:.2e} over 12 replications, four distributions (<= 1e-10)")
    assert ok


def test_criterion_05_lasso_correctness(report):
    g = np.random.default_rng(505)
    worst_kkt = 0.0
    for _ in range(100):
        n = int(g.integers(20, 201))
        p = int(g.integers(2, 31))
        X = g.standard_normal((n, p)) * g.uniform(0.1, 10, p) + g.normal(0, 3, p)
        beta = np.where(g.random(p) < 0.3, g.normal(0, 2, p), 0.0)
        y = X @ beta + g.standard_normal(n)
        lam = g.uniform(0.01, 1.0) * lambda_max(X, y)
        worst_kkt = max(worst_kkt, kkt_violation(X, y, lasso_fit(X, y, lam)))

    X = g.standard_normal((100, 5))
    y = X @ g.standard_normal(5) + g.standard_normal(100)
    ols = ols_fit(np.column_stack([np.ones(100), X]), y).coefficients[1:]
    ols_gap = float(np.max(np.abs(lasso_fit(X, y, 0.0).slopes - ols)))

    zero_ok = True
    for _ in range(20):
        X = g.standard_normal((50, 8))
        y = X[:, 0] + g.standard_normal(50)
        lmax = lambda_grid(X, y)[0]
        for scale in (1.0, 1.5, 10.0):
            zero_ok &= bool(np.all(lasso_fit(X, y, scale * lmax).slopes == 0.0))

    ok = worst_kkt <= 1e-6 and ols_gap <= 1e-6 and zero_ok
    _record(report, 5, "LASSO correctness", ok,
            f"max KKT violation {worst_kkt:.1e} over 100 instances (<= 1e-6); "
            f"lambda=0 vs OLS gap {ols_gap:.1e} (<= 1e-6); zero model at lambda >= lambda_max: {zero_ok}")
    assert ok


def test_criterion_06_leverage_correctness(report):
    g = np.random.default_rng(606)
    worst_h, worst_sum, topk_ok = 0.0, 0.0, True
    for _ in range(50):
        n = int(g.integers(10, 300))
        pa = int(g.integers(1, min(8, n - 2)))
        X = g.standard_t(4, size=(n, pa))
        Z = np.column_stack([np.ones(n), X])
        h = leverage_scores(Z)
        worst_h = max(worst_h, float(np.max(np.abs(h - hat_diag(Z)))))
        worst_sum = max(worst_sum, abs(float(h.sum()) - Z.shape[1]))
        k = int(g.integers(1, n + 1))
        topk_ok &= levss_select(X, k).row_indices.tolist() == brute_top_k(hat_diag(Z).tolist(), k)
    ok = worst_h <= 1e-8 and worst_sum <= 1e-8 and topk_ok
    _record(report, 6, "leverage correctness", ok,
            f"max |h - diag(H)| {worst_h:.1e}, max |sum h - cols| {worst_sum:.1e} (<= 1e-8); "
            f"top-k equals brute force on 50 designs: {topk_ok}")
    assert ok


def test_criterion_07_two_means_oracle(report):
    g = np.random.default_rng(707)
    mismatches = 0
    for _ in range(1000):
        p = int(g.integers(2, 31))
        counts = g.integers(0, 101, p)
        mismatches += kmeans_split(counts).indices.tolist() != brute_force_split(counts.tolist())
    ok = mismatches == 0
    _record(report, 7, "1-D 2-means vs exhaustive search", ok,
            f"{mismatches} mismatches over 1000 count vectors")
    assert ok


def test_criterion_08_pps_frequencies(report):
    g = np.random.default_rng(808)
    draws = [int(weighted_candidate_sample([2.0, 1.0, 0.0, 0.0], 1, g)[0]) for _ in range(30_000)]
    freq = np.bincount(draws, minlength=4) / 30_000
    target = np.array([2 / 3, 1 / 3, 0.0, 0.0])
    gap = float(np.max(np.abs(freq - target)))
    ok = gap <= 0.02 and freq[2] == 0 and freq[3] == 0
    _record(report, 8, "weighted sampling frequencies", ok,
            f"frequencies {np.round(freq, 4).tolist()}, max gap {gap:.4f} (<= 0.02)")
    assert ok


def test_criterion_09_determinism(tmp_path, report):
    config = tmp_path / "config.yaml"
    config.write_text(
        "replications: 3\n"
        "methods: [algorithm1, onephase_baseline, fulldata_lasso]\n"
        "sim: {n: 3000, p: 30, p1: 4, dist: mixture, cov: equicorrelated, n_test: 300}\n"
        "varsel: {n1: 8, n2: 16, s: 300, p_s: 4}\n"
        "subdata: {k: 200}\n",
        encoding="utf-8",
    )
    runs = []
    for name, workers in (("w1", 1), ("w2", 2), ("w3", 3)):
        d = tmp_path / name
        main(["simulate", "--config", str(config), "--seed", "9", "--out", str(d),
              "--workers", str(workers), "--no-timings"])
        runs.append(d)
    replay = tmp_path / "replay"
    main(["simulate", "--config", str(runs[0] / "manifest.json"), "--out", str(replay)])
    runs.append(replay)
    differing = [
        f for f in ("results.csv", "summary.json", "manifest.json")
        if len({(d / f).read_bytes() for d in runs}) != 1
    ]
    ok = not differing
    _record(report, 9, "determinism", ok,
            "results.csv, summary.json and manifest.json byte-identical across workers 1/2/3 "
            "and a manifest replay" if ok else f"differing files: {differing}")
    assert ok


def test_criterion_10_real_data(report):
    train_path = os.environ.get("LASSOLEV_BLOG_TRAIN")
    test_path = os.environ.get("LASSOLEV_BLOG_TEST")
    if train_path and test_path and os.path.exists(train_path) and os.path.exists(test_path):
        train, test = load_csv(train_path), load_csv(test_path)
        details, ok = [], True
        for k in (1000, 5240):
            rc = RunConfig.from_dict({
                "mode": "realdata", "seed": 10, "methods": ["algorithm1", "fulldata_lasso"],
                "subdata": {"k": k}, "realdata": {"B": 100}, "timings": False,
            })
            _, summary = run_realdata(rc, train, test)
            a = summary["methods"]["algorithm1"]["mean_mspe"]
            f = summary["methods"]["fulldata_lasso"]["mean_mspe"]
            ok &= a <= f
            details.append(f"k={k}: {a:.4g} vs {f:.4g}")
        _record(report, 10, "real-data MSPE", ok,
                "algorithm1 <= full-data LASSO mean MSPE; " + "; ".join(details))
        assert ok
        return

    g = np.random.default_rng(1010)
    beta = np.r_[np.ones(5), np.zeros(35)]
    X, Xt = g.standard_normal((4000, 40)), g.standard_normal((400, 40))
    train, test = Dataset(X, 1 + X @ beta), Dataset(Xt, 1 + Xt @ beta)
    rc = RunConfig.from_dict({
        "mode": "realdata", "seed": 10, "methods": ["algorithm1", "fulldata_lasso"],
        "varsel": {"n1": 10, "n2": 20, "s": 500, "p_s": 8},
        "subdata": {"k": 400}, "realdata": {"B": 5}, "timings": False,
    })
    text, summary = run_realdata(rc, train, test)
    values = [float(line.rsplit(",", 1)[1]) for line in text.strip().split("\n")[1:]]
    worst = max(values)
    ok = worst <= 1e-10 and len(values) == 10
    _record(report, 10, "real-data MSPE (dataset absent, noiseless synthetic stand-in)", ok,
            f"largest bootstrap MSPE {worst:.2e} over 2 methods x 5 resamples (<= 1e-10)")
    assert ok
