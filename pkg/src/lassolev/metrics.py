"""Selection scores, simulation MSE and bootstrap prediction error."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._workers import parallel_map
from .model import DimensionMismatch, FittedModel, predict
from .rng import StreamKey

log = logging.getLogger(__name__)


class EmptyTruth(ValueError):
    pass


@dataclass(frozen=True)
class SelectionScore:
    power: float
    error: float


@dataclass
class ExperimentResult:
    replicate: int
    method: str
    power: float
    error: float
    mse: float
    timings: dict = field(default_factory=dict)


def power_error(active_hat, true_active, p: int) -> SelectionScore:
    """Share of true actives found, and share of inactives declared active."""
    hat = {int(j) for j in np.asarray(active_hat).ravel()}
    truth = {int(j) for j in np.asarray(true_active).ravel()}
    if not truth:
        raise EmptyTruth("true active set is empty")
    if any(not 0 <= j < p for j in hat | truth):
        raise ValueError(f"indices must lie in [0, {p})")
    power = len(hat & truth) / len(truth)
    n_inactive = p - len(truth)
    error = len(hat - truth) / n_inactive if n_inactive else 0.0
    return SelectionScore(power, error)


def mse_test(beta_true, model: FittedModel, X_test) -> float:
    """Mean squared gap between true and fitted linear predictors on test rows."""
    X = np.asarray(X_test, dtype=float)
    beta = np.asarray(beta_true, dtype=float).ravel()
    p = X.shape[1]
    if beta.size != p + 1:
        raise DimensionMismatch(f"beta has {beta.size} entries, expected {p + 1}")
    if model.active_indices.size and model.active_indices.max() >= p:
        raise DimensionMismatch("model references a column beyond the test matrix")
    delta = beta - model.coefficient_vector(p)
    gap = delta[0] + X @ delta[1:]
    return float(np.mean(gap**2))


Method = Callable[[np.ndarray, np.ndarray, StreamKey], FittedModel]


def _one_bootstrap(train_X, train_y, test_X, test_y, method: Method, key: StreamKey) -> float:
    n = train_X.shape[0]
    rows = key.generator().integers(0, n, n)
    try:
        model = method(train_X[rows], train_y[rows], key.derive("method"))
        resid = test_y - predict(model, test_X)
    except Exception as exc:  # one failed replicate must not abort the rest
        log.warning("bootstrap replicate %s failed: %s", key.path[-1][1], exc)
        return float("nan")
    return float(np.mean(resid**2))


def bootstrap_mspe(
    train_X,
    train_y,
    test_X,
    test_y,
    method: Method,
    B: int = 100,
    key: StreamKey | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Test-set MSPE of ``method`` refit on ``B`` bootstrap resamples of the training rows.

    Failed replicates come back as NaN.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    key = key if key is not None else StreamKey(0)
    train_X = np.asarray(train_X, dtype=float)
    train_y = np.asarray(train_y, dtype=float).ravel()
    test_X = np.asarray(test_X, dtype=float)
    test_y = np.asarray(test_y, dtype=float).ravel()
    out = parallel_map(
        lambda b: _one_bootstrap(
            train_X, train_y, test_X, test_y, method, key.derive("bootstrap", b)
        ),
        range(B),
        workers,
    )
    return np.asarray(out)
