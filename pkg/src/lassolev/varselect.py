"""Two-phase random-LASSO variable selection on small subsamples.

Phase 1 fits a cross-validated LASSO on ``n1`` row subsamples and scores
each variable by the absolute mean of its coefficients.  Phase 2 draws
``n2`` fresh subsamples, each paired with an importance-weighted candidate
set of ``p_s`` variables, and counts how often each variable survives the
LASSO.  A 1-D two-cluster split of the counts yields the active set.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from ._workers import parallel_map
from .lasso import cv_lasso
from .rng import StreamKey

log = logging.getLogger(__name__)


class InvalidSize(ValueError):
    pass


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class VarSelectConfig:
    n1: int = 50
    n2: int = 100
    s: int = 1000
    p_s: Optional[int] = None  # None -> ceil(0.1 p)
    seed: int = 0
    n_folds: int = 10

    def resolve_p_s(self, p: int) -> int:
        return self.p_s if self.p_s is not None else max(1, -(-p // 10))

    def validate(self, n: int, p: int) -> None:
        if not 1 <= self.s <= n:
            raise InvalidConfig(f"subsample size s={self.s} must lie in [1, n={n}]")
        if not 1 <= self.resolve_p_s(p) <= p:
            raise InvalidConfig(f"p_s={self.resolve_p_s(p)} must lie in [1, p={p}]")
        if self.n1 < 1 or self.n2 < 1:
            raise InvalidConfig("n1 and n2 must be positive")
        if not 2 <= self.n_folds <= self.s:
            raise InvalidConfig(f"n_folds={self.n_folds} must lie in [2, s={self.s}]")


@dataclass(frozen=True)
class SelectionCounts:
    counts: np.ndarray
    n2: int
    n_degenerate: int = 0


@dataclass(frozen=True)
class ActiveSet:
    indices: np.ndarray
    counts: np.ndarray
    cluster_means: tuple[float, float]
    degenerate: bool = False
    importance: Optional[np.ndarray] = None
    timings: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.indices.size)


def subsample_without_replacement(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """``s`` distinct row indices out of ``range(n)`` by a partial Fisher-Yates shuffle.

    Returned sorted.
    """
    if not 1 <= s <= n:
        raise InvalidSize(f"cannot draw {s} of {n} rows without replacement")
    pool = np.arange(n)
    # swap targets are independent of the evolving pool: j_i ~ U{i, ..., n-1}
    targets = rng.integers(np.arange(s), n)
    for i, j in enumerate(targets.tolist()):
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:s])


def importance_measure(slope_matrix) -> np.ndarray:
    """|column mean| of an ``n1 x p`` coefficient matrix (excluded variables enter as 0)."""
    B = np.atleast_2d(np.asarray(slope_matrix, dtype=float))
    return np.abs(B.mean(axis=0))


def weighted_candidate_sample(m, p_s: int, rng: np.random.Generator) -> np.ndarray:
    """Sequential probability-proportional-to-size draws without replacement.

    If at most ``p_s`` weights are positive, all of them are returned; an
    all-zero weight vector gives an empty array.
    """
    w = np.asarray(m, dtype=float).copy()
    if p_s < 1:
        raise ValueError("p_s must be at least 1")
    positive = np.flatnonzero(w > 0)
    if positive.size <= p_s:
        return positive
    w[w < 0] = 0.0
    chosen = []
    for _ in range(p_s):
        cum = np.cumsum(w)
        u = rng.random() * cum[-1]
        j = int(np.searchsorted(cum, u, side="right"))
        if j >= w.size or w[j] <= 0:
            # u rounded onto the upper edge
            j = int(np.flatnonzero(w > 0)[-1])
        chosen.append(j)
        w[j] = 0.0
    return np.sort(np.array(chosen, dtype=np.int64))


def kmeans_split(counts) -> ActiveSet:
    """Optimal two-cluster split of 1-D counts; the high cluster is active.

    The optimum of 1-D 2-means is a threshold on the sorted values, so every
    gap between distinct values is scored exactly and the best one kept.
    Equal scores resolve toward the higher threshold.  All-equal counts give
    an empty, degenerate result.
    """
    if isinstance(counts, SelectionCounts):
        counts = counts.counts
    c = np.asarray(counts)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need at least two counts")
    vals, mult = np.unique(c, return_counts=True)
    if vals.size == 1:
        v = float(vals[0])
        return ActiveSet(np.array([], dtype=np.int64), c, (v, v), degenerate=True)

    fv = [Fraction(float(v)) for v in vals]
    total_n = int(c.size)
    total_s = sum(v * k for v, k in zip(fv, mult.tolist()))
    best_score, best_cut = None, None
    lo_n, lo_s = 0, Fraction(0)
    for i in range(vals.size - 1):
        lo_n += int(mult[i])
        lo_s += fv[i] * int(mult[i])
        hi_n, hi_s = total_n - lo_n, total_s - lo_s
        # between-cluster sum of squares (times n); maximizing it minimizes within-SS
        diff = hi_s / hi_n - lo_s / lo_n
        score = lo_n * hi_n * diff * diff
        if best_score is None or score >= best_score:
            best_score, best_cut = score, i + 1
    threshold = vals[best_cut]
    active = np.flatnonzero(c >= threshold)
    hi = c[c >= threshold].mean()
    lo = c[c < threshold].mean()
    return ActiveSet(active.astype(np.int64), c, (float(lo), float(hi)))


def _phase_one_fit(X, y, s, n_folds, key: StreamKey) -> np.ndarray:
    g = key.generator()
    rows = subsample_without_replacement(X.shape[0], s, g)
    _, fit = cv_lasso(X[rows], y[rows], n_folds=n_folds, rng=g)
    return fit.slopes


def phase_one_importance(X, y, cfg: VarSelectConfig, key: StreamKey, workers: int = 1):
    """Steps 1-3: returns (importance vector, n1 x p slope matrix)."""
    slopes = parallel_map(
        lambda r: _phase_one_fit(X, y, cfg.s, cfg.n_folds, key.derive("phase1", r)),
        range(cfg.n1),
        workers,
    )
    B = np.vstack(slopes)
    return importance_measure(B), B


def _phase_two_set(X, y, m, s, p_s, n_folds, key: StreamKey):
    g = key.generator()
    rows = subsample_without_replacement(X.shape[0], s, g)
    cand = weighted_candidate_sample(m, p_s, g)
    if cand.size == 0:
        return None
    _, fit = cv_lasso(X[np.ix_(rows, cand)], y[rows], n_folds=n_folds, rng=g)
    return cand[fit.slopes != 0]


def phase_two_counts(
    X, y, m, cfg: VarSelectConfig, key: StreamKey, workers: int = 1
) -> SelectionCounts:
    """Steps 4-6: counts of phase-2 LASSO fits retaining each variable."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p_s = cfg.resolve_p_s(X.shape[1])
    sets = parallel_map(
        lambda r: _phase_two_set(X, y, m, cfg.s, p_s, cfg.n_folds, key.derive("phase2", r)),
        range(cfg.n2),
        workers,
    )
    counts = np.zeros(X.shape[1], dtype=np.int64)
    n_empty = 0
    for a in sets:
        if a is None:
            n_empty += 1
        else:
            counts[a] += 1
    return SelectionCounts(counts, cfg.n2, n_empty)


def select_variables(
    X, y, cfg: VarSelectConfig, key: Optional[StreamKey] = None, workers: int = 1
) -> ActiveSet:
    """Run the full two-phase selection; a pure function of (data, cfg, key)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    cfg.validate(n, p)
    if key is None:
        key = StreamKey(cfg.seed)
    timings = {}

    t0 = time.perf_counter()
    m, _ = phase_one_importance(X, y, cfg, key, workers)
    timings["phase1_lasso"] = time.perf_counter() - t0

    if not np.any(m > 0):
        log.warning("phase 1 kept no variable; active set is empty")
        zeros = np.zeros(p, dtype=np.int64)
        return ActiveSet(
            np.array([], dtype=np.int64), zeros, (0.0, 0.0), True, m, timings
        )

    t0 = time.perf_counter()
    counts = phase_two_counts(X, y, m, cfg, key, workers)
    timings["phase2_lasso"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    split = kmeans_split(counts)
    timings["kmeans"] = time.perf_counter() - t0
    return ActiveSet(
        split.indices, split.counts, split.cluster_means, split.degenerate, m, timings
    )


def select_variables_onephase_baseline(
    X,
    y,
    nsample: int = 1000,
    ntimes: int = 100,
    key: Optional[StreamKey] = None,
    n_folds: int = 10,
    workers: int = 1,
) -> ActiveSet:
    """Repeated plain LASSO on subsamples, then the same 2-means split of the counts."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if not 1 <= nsample <= n:
        raise InvalidSize(f"cannot draw {nsample} of {n} rows without replacement")
    if key is None:
        key = StreamKey(0)
    timings = {}
    t0 = time.perf_counter()
    slopes = parallel_map(
        lambda r: _phase_one_fit(X, y, nsample, n_folds, key.derive("onephase", r)),
        range(ntimes),
        workers,
    )
    counts = (np.vstack(slopes) != 0).sum(axis=0).astype(np.int64)
    timings["phase1_lasso"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    split = kmeans_split(counts)
    timings["kmeans"] = time.perf_counter() - t0
    return ActiveSet(split.indices, split.counts, split.cluster_means, split.degenerate, None, timings)
