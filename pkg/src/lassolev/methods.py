"""End-to-end estimators compared in the experiments.

Each method maps ``(X, y, key)`` to a :class:`FittedModel` whose ``meta``
carries per-stage wall-clock seconds under ``"timings"``.

* ``algorithm1``: two-phase random-LASSO selection, leverage subdata, OLS.
* ``onephase_baseline``: repeated plain LASSO counts, IBOSS subdata, OLS.
* ``fulldata_lasso``: cross-validated LASSO on all rows, then OLS refit on
  the selected columns using all rows.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Union

import numpy as np

from .lasso import cv_lasso
from .linalg import ols_fit
from .model import FittedModel, fit_final
from .rng import StreamKey
from .subdata import IBOSS, LEVSS, KTooLarge, select_subdata
from .varselect import VarSelectConfig, select_variables, select_variables_onephase_baseline

METHODS = ("algorithm1", "onephase_baseline", "fulldata_lasso")
METHOD_IDS = {name: i for i, name in enumerate(METHODS)}

KSpec = Union[int, str]


def resolve_count(spec: KSpec, total: int, suffix: str = "n") -> int:
    """An integer, or a fraction of ``total`` such as ``"0.1n"`` rounded up exactly."""
    if isinstance(spec, (int, np.integer)):
        return int(spec)
    text = str(spec).strip().replace(" ", "")
    if text.endswith(suffix):
        frac = Fraction(text[: -len(suffix)] or "1")
        return -(-(frac.numerator * total) // frac.denominator)
    return int(text)


def resolve_k(k: KSpec, n: int) -> int:
    value = resolve_count(k, n, "n")
    if value < 1:
        raise ValueError(f"subdata size must be positive, got {k!r}")
    if value > n:
        raise KTooLarge(f"subdata size k={value} exceeds n={n}")
    return value


@dataclass(frozen=True)
class MethodSettings:
    varsel: VarSelectConfig = field(default_factory=VarSelectConfig)
    k: KSpec = 1000
    selector: str = LEVSS
    baseline_selector: str = IBOSS
    workers: int = 1


def algorithm1(X, y, key: StreamKey, settings: MethodSettings) -> FittedModel:
    n = X.shape[0]
    k = resolve_k(settings.k, n)
    settings.varsel.validate(*X.shape)
    t_start = time.perf_counter()
    active = select_variables(X, y, settings.varsel, key, settings.workers)
    timings = dict(active.timings)
    t0 = time.perf_counter()
    selection = select_subdata(X[:, active.indices], k, settings.selector) if active.size else None
    timings["subdata"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    model = fit_final(X, y, active, selection, method="algorithm1")
    timings["final_fit"] = time.perf_counter() - t0
    timings["total"] = time.perf_counter() - t_start
    model.meta["timings"] = timings
    model.meta["degenerate"] = bool(active.degenerate)
    return model


def onephase_baseline(X, y, key: StreamKey, settings: MethodSettings) -> FittedModel:
    n = X.shape[0]
    k = resolve_k(settings.k, n)
    cfg = settings.varsel
    t_start = time.perf_counter()
    active = select_variables_onephase_baseline(
        X, y, nsample=cfg.s, ntimes=cfg.n2, key=key, n_folds=cfg.n_folds, workers=settings.workers
    )
    timings = dict(active.timings)
    t0 = time.perf_counter()
    selection = (
        select_subdata(X[:, active.indices], k, settings.baseline_selector) if active.size else None
    )
    timings["subdata"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    model = fit_final(X, y, active, selection, method="onephase_baseline")
    timings["final_fit"] = time.perf_counter() - t0
    timings["total"] = time.perf_counter() - t_start
    model.meta["timings"] = timings
    model.meta["degenerate"] = bool(active.degenerate)
    return model


def fulldata_lasso(X, y, key: StreamKey, settings: MethodSettings) -> FittedModel:
    n = X.shape[0]
    t_start = time.perf_counter()
    _, fit = cv_lasso(X, y, n_folds=settings.varsel.n_folds, rng=key.generator())
    timings = {"fulldata_lasso": time.perf_counter() - t_start}
    t0 = time.perf_counter()
    cols = fit.support
    if cols.size:
        coef = ols_fit(np.column_stack([np.ones(n), X[:, cols]]), y).coefficients
        model = FittedModel(cols, coef[1:], float(coef[0]), {"method": "fulldata_lasso"})
    else:
        model = FittedModel(cols, np.zeros(0), float(np.mean(y)), {"method": "fulldata_lasso"})
    timings["final_fit"] = time.perf_counter() - t0
    timings["total"] = time.perf_counter() - t_start
    model.meta.update({"selector": "FULL", "k": n, "timings": timings})
    return model


_IMPLS = {
    "algorithm1": algorithm1,
    "onephase_baseline": onephase_baseline,
    "fulldata_lasso": fulldata_lasso,
}


def make_method(name: str, settings: MethodSettings):
    """Bind settings to a method, giving a ``(X, y, key) -> FittedModel`` callable."""
    try:
        impl = _IMPLS[name]
    except KeyError:
        raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}") from None
    return partial(_call, impl, settings)


def _call(impl, settings, X, y, key):
    return impl(np.asarray(X, dtype=float), np.asarray(y, dtype=float).ravel(), key, settings)
