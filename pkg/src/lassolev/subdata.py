"""Deterministic subdata selection on the active columns.

``levss_select`` keeps the ``k`` rows of largest leverage under an
intercept-augmented design; ``iboss_select`` keeps per-covariate extremes.
Both break ties toward the smaller row index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import leverage_scores

LEVSS = "LEVSS"
IBOSS = "IBOSS"


class KTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SubdataSelection:
    row_indices: np.ndarray
    selector: str
    leverage_values: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return int(self.row_indices.size)


def _check(X_active, k: int) -> np.ndarray:
    X = np.asarray(X_active, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if k > n:
        raise KTooLarge(f"subdata size k={k} exceeds n={n}")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return X


def top_k_stable(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` largest scores, ties to the smaller index; sorted."""
    order = np.argsort(-scores, kind="stable")
    return np.sort(order[:k])


def levss_select(X_active, k: int) -> SubdataSelection:
    X = _check(X_active, k)
    n = X.shape[0]
    Z = np.column_stack([np.ones(n), X])
    h = leverage_scores(Z)
    return SubdataSelection(top_k_stable(h, k), LEVSS, h)


def iboss_select(X_active, k: int) -> SubdataSelection:
    """Information-based selection of per-covariate extremes.

    Each covariate in turn contributes ``k // (2 p)`` of its smallest and
    as many of its largest not-yet-chosen rows.  Leftover rows are then
    handed out one per covariate in column order, a first pass taking the
    maximum side and a second pass the minimum side.
    """
    X = _check(X_active, k)
    n, p = X.shape
    taken = np.zeros(n, dtype=bool)
    # per column: ascending order and descending order, both stable by row index
    asc = [np.argsort(X[:, j], kind="stable") for j in range(p)]
    desc = [np.argsort(-X[:, j], kind="stable") for j in range(p)]
    cursor = {}

    def take(j: int, side: str, r: int) -> None:
        order = asc[j] if side == "min" else desc[j]
        pos = cursor.get((j, side), 0)
        got = 0
        while got < r:
            i = order[pos]
            pos += 1
            if not taken[i]:
                taken[i] = True
                got += 1
        cursor[(j, side)] = pos

    r = k // (2 * p)
    if r:
        for j in range(p):
            take(j, "min", r)
            take(j, "max", r)
    rem = k - 2 * r * p
    for i in range(rem):
        take(i % p, "max" if (i // p) % 2 == 0 else "min", 1)
    return SubdataSelection(np.flatnonzero(taken), IBOSS)


def select_subdata(X_active, k: int, selector: str = LEVSS) -> SubdataSelection:
    selector = selector.upper()
    if selector == LEVSS:
        return levss_select(X_active, k)
    if selector == IBOSS:
        return iboss_select(X_active, k)
    raise ValueError(f"unknown selector {selector!r}")
