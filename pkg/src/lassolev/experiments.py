"""Simulation, sweep, bootstrap and one-shot fit runners behind the CLI.

All randomness is addressed by ``(seed, replicate, ...)`` stream keys that
are fixed before any work is dispatched, and result rows are sorted before
they are written, so output does not depend on the worker count.  Wall-clock
seconds are the one nondeterministic field; ``timings: false`` blanks them.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import __version__
from .dataset import Dataset, load_csv
from .methods import METHOD_IDS, METHODS, MethodSettings, make_method, resolve_count, resolve_k
from .metrics import ExperimentResult, bootstrap_mspe, mse_test, power_error
from .rng import StreamKey
from .simgen import Distribution, SimConfig, gen_covariates, generate
from .varselect import VarSelectConfig

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("replicate", "method", "power", "error", "mse", "stage", "seconds")
STAGES = (
    "phase1_lasso",
    "phase2_lasso",
    "kmeans",
    "fulldata_lasso",
    "subdata",
    "final_fit",
    "total",
)
MODES = ("simulate", "sweep", "realdata", "fit")
# fields that never change results and stay out of the manifest
_RUNTIME_ONLY = ("workers", "out")


@dataclass
class RunConfig:
    mode: str = "simulate"
    seed: int = 0
    out: str = "results"
    workers: int = 1
    timings: bool = True
    replications: int = 100
    methods: tuple[str, ...] = ("algorithm1",)
    sim: dict = field(
        default_factory=lambda: {
            "n": 10_000,
            "p": 500,
            "p1": 10,
            "beta_active": 1.0,
            "intercept": 1.0,
            "sigma2": 9.0,
            "dist": "normal",
            "cov": "identity",
            "n_test": 1000,
        }
    )
    varsel: dict = field(
        default_factory=lambda: {"n1": 50, "n2": 100, "s": 1000, "p_s": "0.1p", "n_folds": 10}
    )
    subdata: dict = field(
        default_factory=lambda: {"selector": "LEVSS", "k": 1000, "baseline_selector": "IBOSS"}
    )
    sweep: dict = field(default_factory=lambda: {"n1": [50, 100], "n2": [100], "p_s": [10, 20, 50, 100]})
    realdata: dict = field(default_factory=lambda: {"train": None, "test": None, "B": 100})
    fit: dict = field(default_factory=lambda: {"data": None})

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        self.methods = tuple(self.methods)
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if self.replications < 1:
            raise ValueError("replications must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "config" in d and "lassolev_version" in d:  # a manifest
            d = d["config"]
        base = cls()
        kwargs: dict[str, Any] = {}
        for f in fields(cls):
            if f.name not in d:
                continue
            value = d[f.name]
            default = getattr(base, f.name)
            if isinstance(default, dict):
                value = {**default, **(value or {})}
            if f.name == "methods" and isinstance(value, str):
                value = [m.strip() for m in value.split(",") if m.strip()]
            kwargs[f.name] = value
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**kwargs)

    def to_dict(self, runtime: bool = True) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        if not runtime:
            for key in _RUNTIME_ONLY:
                d.pop(key, None)
        return d

    def sim_config(self) -> SimConfig:
        s = self.sim
        return SimConfig(
            n=int(s["n"]),
            p=int(s["p"]),
            p1=int(s["p1"]),
            beta_active=float(s["beta_active"]),
            intercept=float(s["intercept"]),
            sigma2=float(s["sigma2"]),
            dist=Distribution.parse(s["dist"]),
            cov=str(s["cov"]).lower(),
            seed=self.seed,
        )

    def varsel_config(self, p: int) -> VarSelectConfig:
        v = self.varsel
        return VarSelectConfig(
            n1=int(v["n1"]),
            n2=int(v["n2"]),
            s=int(v["s"]),
            p_s=resolve_count(v["p_s"], p, "p"),
            seed=self.seed,
            n_folds=int(v["n_folds"]),
        )

    def method_settings(self, p: int) -> MethodSettings:
        return MethodSettings(
            varsel=self.varsel_config(p),
            k=self.subdata["k"],
            selector=str(self.subdata["selector"]).upper(),
            baseline_selector=str(self.subdata["baseline_selector"]).upper(),
        )


def load_config(path) -> RunConfig:
    """Read a YAML (or JSON) config, or a previously written manifest."""
    with open(path, encoding="utf-8") as fh:
        d = yaml.safe_load(fh) or {}
    return RunConfig.from_dict(d)


def manifest(rc: RunConfig, extra: Optional[dict] = None) -> dict:
    doc = {
        "lassolev_version": __version__,
        "numpy_version": np.__version__,
        "mode": rc.mode,
        "seed": rc.seed,
        "config": rc.to_dict(runtime=False),
    }
    if extra:
        doc.update(extra)
    return doc


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


# ---------------------------------------------------------------- simulate


@dataclass
class _Failure:
    replicate: int
    method: str
    reason: str


def _run_replicate(rc: RunConfig, r: int) -> list:
    key = StreamKey(int(rc.seed)).derive("replicate", r)
    sim = rc.sim_config()
    X, y = generate(sim, key.derive("train"))
    X_test = gen_covariates(replace(sim, n=int(rc.sim.get("n_test", 1000))), key.derive("test"))
    beta = sim.beta()
    settings = rc.method_settings(sim.p)
    out: list = []
    for name in rc.methods:
        try:
            model = make_method(name, settings)(X, y, key.derive("method", METHOD_IDS[name]))
            if sim.p1:
                score = power_error(model.active_indices, sim.true_active, sim.p)
                power, error = score.power, score.error
            else:
                power, error = float("nan"), model.active_indices.size / sim.p
            mse = mse_test(beta, model, X_test)
            out.append(ExperimentResult(r, name, power, error, mse, model.meta.get("timings", {})))
        except Exception as exc:
            log.warning("replicate %d, method %s failed: %s", r, name, exc)
            out.append(_Failure(r, name, f"{type(exc).__name__}: {exc}"))
    return out


def _map_replicates(rc: RunConfig, reps: range) -> list:
    if rc.workers <= 1 or len(reps) <= 1:
        chunks = [_run_replicate(rc, r) for r in reps]
    else:
        with ProcessPoolExecutor(max_workers=rc.workers) as pool:
            chunks = list(pool.map(_run_replicate, [rc] * len(reps), reps))
    return [item for chunk in chunks for item in chunk]


def _result_rows(results: list, with_timings: bool) -> list[tuple]:
    order = {m: i for i, m in enumerate(METHODS)}
    rows = []
    for res in results:
        if isinstance(res, _Failure):
            continue
        for stage in STAGES:
            if stage not in res.timings:
                continue
            seconds = float(res.timings[stage]) if with_timings else None
            rows.append((
                res.replicate, order[res.method], res.method, res.power, res.error, res.mse,
                STAGES.index(stage), stage, seconds,
            ))
    rows.sort(key=lambda t: (t[0], t[1], t[6]))
    return [(r[0], r[2], r[3], r[4], r[5], r[7], r[8]) for r in rows]


def _summary(results: list, methods, with_timings: bool) -> dict:
    out = {}
    for name in methods:
        ok = [r for r in results if isinstance(r, ExperimentResult) and r.method == name]
        failed = [r for r in results if isinstance(r, _Failure) and r.method == name]
        powers = [r.power for r in ok if not math.isnan(r.power)]
        entry = {
            "n_ok": len(ok),
            "n_failed": len(failed),
            "mean_power": float(np.mean(powers)) if powers else None,
            "mean_error": float(np.mean([r.error for r in ok])) if ok else None,
            "mean_mse": float(np.mean([r.mse for r in ok])) if ok else None,
        }
        if with_timings and ok:
            stages = [s for s in STAGES if s in ok[0].timings]
            entry["mean_seconds"] = {s: float(np.mean([r.timings[s] for r in ok])) for s in stages}
        if failed:
            entry["failures"] = [f"replicate {f.replicate}: {f.reason}" for f in failed]
        out[name] = entry
    return out


@dataclass
class SimulationOutput:
    results: list
    rows: list
    summary: dict

    def csv_text(self, prefix_cols: tuple = (), prefix: tuple = ()) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(prefix_cols + RESULT_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(v) for v in prefix + row])
        return buf.getvalue()


def run_simulation(rc: RunConfig) -> SimulationOutput:
    """Generate train/test data per replicate and score every requested method."""
    results = _map_replicates(rc, range(rc.replications))
    rows = _result_rows(results, rc.timings)
    summary = {
        "replications": rc.replications,
        "methods": _summary(results, rc.methods, rc.timings),
    }
    return SimulationOutput(results, rows, summary)


def write_simulation(rc: RunConfig) -> SimulationOutput:
    out = run_simulation(rc)
    d = _outdir(rc)
    (d / "results.csv").write_text(out.csv_text(), encoding="utf-8")
    (d / "summary.json").write_text(_dumps(out.summary), encoding="utf-8")
    (d / "manifest.json").write_text(_dumps(manifest(rc)), encoding="utf-8")
    return out


# ------------------------------------------------------------------- sweep

SWEEP_COLUMNS = ("n1", "n2", "p_s")


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def sweep_cells(rc: RunConfig) -> list[tuple]:
    g = rc.sweep
    n1s = _as_list(g.get("n1", rc.varsel["n1"]))
    n2s = _as_list(g.get("n2", rc.varsel["n2"]))
    pss = _as_list(g.get("p_s", rc.varsel["p_s"]))
    return [(a, b, c) for a in n1s for b in n2s for c in pss]


def run_sweep(rc: RunConfig) -> tuple[str, dict]:
    """One simulation per grid cell of (n1, n2, p_s); rows carry the cell labels."""
    p = int(rc.sim["p"])
    header_done = False
    buf = io.StringIO()
    summary = {"cells": []}
    for n1, n2, p_s in sweep_cells(rc):
        cell = replace(rc, mode="simulate", varsel={**rc.varsel, "n1": n1, "n2": n2, "p_s": p_s})
        out = run_simulation(cell)
        label = (int(n1), int(n2), resolve_count(p_s, p, "p"))
        text = out.csv_text(SWEEP_COLUMNS, label)
        buf.write(text if not header_done else text.split("\n", 1)[1])
        header_done = True
        summary["cells"].append({"n1": label[0], "n2": label[1], "p_s": label[2], **out.summary})
    return buf.getvalue(), summary


def write_sweep(rc: RunConfig) -> tuple[str, dict]:
    text, summary = run_sweep(rc)
    d = _outdir(rc)
    (d / "sweep.csv").write_text(text, encoding="utf-8")
    (d / "summary.json").write_text(_dumps(summary), encoding="utf-8")
    (d / "manifest.json").write_text(_dumps(manifest(rc)), encoding="utf-8")
    return text, summary


# ---------------------------------------------------------------- realdata

MSPE_COLUMNS = ("method", "k", "bootstrap", "mspe")


def run_realdata(rc: RunConfig, train: Optional[Dataset] = None, test: Optional[Dataset] = None):
    """Bootstrap test-set MSPE for each method on a fixed train/test pair."""
    if train is None:
        train = load_csv(rc.realdata["train"])
    if test is None:
        test = load_csv(rc.realdata["test"])
    if test.p != train.p:
        raise ValueError(f"train has {train.p} covariates but test has {test.p}")
    k = resolve_k(rc.subdata["k"], train.n)
    settings = replace(rc.method_settings(train.p), k=k)
    B = int(rc.realdata.get("B", 100))
    key = StreamKey(int(rc.seed)).derive("realdata")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MSPE_COLUMNS)
    summary = {"k": k, "B": B, "n_train": train.n, "n_test": test.n, "p": train.p, "methods": {}}
    for name in rc.methods:
        mspe = bootstrap_mspe(
            train.X, train.y, test.X, test.y, make_method(name, settings), B, key, rc.workers
        )
        for b, v in enumerate(mspe):
            w.writerow([name, k, b, _fmt(float(v))])
        ok = mspe[~np.isnan(mspe)]
        summary["methods"][name] = {
            "mean_mspe": float(ok.mean()) if ok.size else None,
            "n_ok": int(ok.size),
            "n_failed": int(np.isnan(mspe).sum()),
        }
    return buf.getvalue(), summary


def write_realdata(rc: RunConfig):
    train = load_csv(rc.realdata["train"])
    test = load_csv(rc.realdata["test"])
    text, summary = run_realdata(rc, train, test)
    d = _outdir(rc)
    (d / "mspe.csv").write_text(text, encoding="utf-8")
    (d / "summary.json").write_text(_dumps(summary), encoding="utf-8")
    data_info = {"data": {"n_train": train.n, "n_test": test.n, "p": train.p}}
    (d / "manifest.json").write_text(_dumps(manifest(rc, data_info)), encoding="utf-8")
    return text, summary


# --------------------------------------------------------------------- fit


def run_fit(rc: RunConfig, data: Optional[Dataset] = None):
    """Select variables, select subdata and fit on one CSV; returns the model."""
    if data is None:
        data = load_csv(rc.fit["data"])
    settings = rc.method_settings(data.p)
    resolve_k(settings.k, data.n)  # fail on k > n before any fitting
    settings.varsel.validate(data.n, data.p)
    method = "algorithm1" if not rc.methods else rc.methods[0]
    model = make_method(method, settings)(data.X, data.y, StreamKey(int(rc.seed)).derive("fit"))
    model.meta["seed"] = int(rc.seed)
    if data.column_names:
        model.meta["active_names"] = [data.column_names[j] for j in model.active_indices]
    if not rc.timings:
        model.meta.pop("timings", None)
    return model


def write_fit(rc: RunConfig):
    data = load_csv(rc.fit["data"])
    model = run_fit(rc, data)
    d = _outdir(rc)
    (d / "model.json").write_text(model.to_json(), encoding="utf-8")
    info = {"data": {"n": data.n, "p": data.p}}
    (d / "manifest.json").write_text(_dumps(manifest(rc, info)), encoding="utf-8")
    return model


def _outdir(rc: RunConfig) -> Path:
    d = Path(rc.out)
    d.mkdir(parents=True, exist_ok=True)
    return d
