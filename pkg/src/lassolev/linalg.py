"""Dense least-squares kernels built on a thin QR factorization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

RANK_RTOL = 1e-10


class RankDeficient(np.linalg.LinAlgError):
    """Design matrix is numerically rank deficient."""


class NotPositiveDefinite(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    gram_inverse: Optional[np.ndarray] = None


def _as_matrix(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.ndim != 2 or Z.shape[0] < 1 or Z.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("matrix contains non-finite entries")
    return Z


def _thin_qr(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, p = Z.shape
    if n < p:
        raise RankDeficient(f"{n} rows cannot support {p} columns")
    Q, R = np.linalg.qr(Z, mode="reduced")
    d = np.abs(np.diag(R))
    if d.max() == 0.0 or d.min() < RANK_RTOL * d.max():
        raise RankDeficient(
            f"smallest triangular pivot {d.min():.3e} below {RANK_RTOL:g} x {d.max():.3e}"
        )
    return Q, R


def ols_fit(Z, y, with_gram_inverse: bool = False) -> OlsFit:
    """Least squares ``min ||y - Z b||^2`` via thin QR.

    Raises :class:`RankDeficient` if a diagonal entry of R is below
    ``1e-10`` times the largest one.
    """
    Z = _as_matrix(Z)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != Z.shape[0]:
        raise ValueError(f"Z has {Z.shape[0]} rows but y has length {y.shape[0]}")
    Q, R = _thin_qr(Z)
    coef = solve_triangular(R, Q.T @ y, lower=False)
    gram_inv = None
    if with_gram_inverse:
        Rinv = solve_triangular(R, np.eye(R.shape[0]), lower=False)
        gram_inv = Rinv @ Rinv.T
        gram_inv = 0.5 * (gram_inv + gram_inv.T)
    return OlsFit(coefficients=coef, gram_inverse=gram_inv)


def leverage_scores(Z) -> np.ndarray:
    """Diagonal of the hat matrix, as squared row norms of the thin Q factor."""
    Q, _ = _thin_qr(_as_matrix(Z))
    return np.einsum("ij,ij->i", Q, Q)


def cholesky_factor(S) -> np.ndarray:
    S = _as_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if np.max(np.abs(S - S.T)) > 1e-12 * max(1.0, np.max(np.abs(S))):
        raise ValueError("matrix is not symmetric")
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
