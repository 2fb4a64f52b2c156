"""Final subdata OLS fit with full-data adjusted intercept, and prediction."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import ols_fit
from .subdata import SubdataSelection


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FittedModel:
    active_indices: np.ndarray
    slopes: np.ndarray
    intercept: float
    meta: dict = field(default_factory=dict)

    def coefficient_vector(self, p: int) -> np.ndarray:
        """Intercept followed by ``p`` slopes, zeros for inactive columns."""
        beta = np.zeros(p + 1)
        beta[0] = self.intercept
        beta[1 + self.active_indices] = self.slopes
        return beta

    def to_dict(self) -> dict:
        return {
            "active": [int(j) for j in self.active_indices],
            "slopes": [float(b) for b in self.slopes],
            "intercept": float(self.intercept),
            "meta": self.meta,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        return cls(
            np.asarray(d["active"], dtype=np.int64),
            np.asarray(d["slopes"], dtype=float),
            float(d["intercept"]),
            dict(d.get("meta", {})),
        )


def _indices(active) -> np.ndarray:
    idx = getattr(active, "indices", active)
    return np.sort(np.asarray(idx, dtype=np.int64).ravel())


def fit_final(X, y, active, selection: Optional[SubdataSelection], **meta) -> FittedModel:
    """OLS on the selected rows and active columns, then replace the intercept.

    The intercept becomes ``mean(y) - mean(X_active) @ slopes`` over the full
    data.  An empty active set yields the intercept-only model ``mean(y)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    idx = _indices(active)
    if selection is not None:
        meta = {"selector": selection.selector, "k": selection.k, **meta}
    if idx.size == 0:
        return FittedModel(idx, np.zeros(0), float(y.mean()), meta)
    if selection is None:
        raise ValueError("a subdata selection is required for a nonempty active set")
    rows = selection.row_indices
    Zs = np.column_stack([np.ones(rows.size), X[np.ix_(rows, idx)]])
    slopes = ols_fit(Zs, y[rows]).coefficients[1:]
    intercept = float(y.mean() - X[:, idx].mean(axis=0) @ slopes)
    return FittedModel(idx, slopes, intercept, meta)


def predict(model: FittedModel, X_test) -> np.ndarray:
    X = np.asarray(X_test, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if model.active_indices.size and X.shape[1] <= model.active_indices.max():
        raise DimensionMismatch(
            f"test matrix has {X.shape[1]} columns, model uses column {model.active_indices.max()}"
        )
    if model.active_indices.size == 0:
        return np.full(X.shape[0], model.intercept)
    return model.intercept + X[:, model.active_indices] @ model.slopes
