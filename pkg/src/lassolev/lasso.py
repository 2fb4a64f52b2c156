"""L1-penalized least squares by cyclic coordinate descent.

Objective, on internally standardized columns and centered response::

    (1 / (2 n)) ||y - X b||^2 + lambda ||b||_1

so ``lambda_max = max_j |x_j' y| / n``.  Coefficients are reported on the
original scale together with the matching intercept.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .rng import as_generator

TOL = 1e-7
MAX_SWEEPS = 10_000
# relative threshold below which a column counts as constant
_DEGENERATE_RTOL = 1e-12
# active-set sweeps between attempts at an exact solve on the support
_POLISH_EVERY = 10


class DegenerateColumn(UserWarning):
    """A zero-variance column was held at zero."""


class AllZeroResponse(UserWarning):
    """The response is constant, so the only useful penalty is zero."""


@dataclass(frozen=True)
class LassoFit:
    intercept: float
    slopes: np.ndarray
    lam: float
    n_iterations: int
    converged: bool
    degenerate: tuple[int, ...] = ()

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.slopes)


@dataclass(frozen=True)
class CvResult:
    lambda_grid: np.ndarray
    cv_mean_error: np.ndarray
    cv_se: np.ndarray
    lambda_min: float
    lambda_1se: float
    fold_ids: np.ndarray = field(repr=False)

    @property
    def index_1se(self) -> int:
        return int(np.flatnonzero(self.lambda_grid == self.lambda_1se)[0])


@njit(cache=True, nogil=True)
def _update(j, beta, grad, G, lam):
    gjj = G[j, j]
    bj = beta[j]
    z = grad[j] + gjj * bj
    if z > lam:
        nb = (z - lam) / gjj
    elif z < -lam:
        nb = (z + lam) / gjj
    else:
        nb = 0.0
    d = nb - bj
    if d != 0.0:
        beta[j] = nb
        for k in range(G.shape[0]):
            grad[k] -= G[j, k] * d
    return abs(d)


@njit(cache=True, nogil=True)
def _polish(beta, grad, G, lam):
    """Jump to the exact minimizer on the current support and signs, if consistent.

    Slowly mixing sweeps on correlated columns converge linearly toward this
    point; the sweeps that follow confirm it, so a rejected jump costs nothing.
    """
    act = np.flatnonzero(beta)
    m = act.size
    A = np.empty((m, m))
    rhs = np.empty(m)
    for a in range(m):
        ja = act[a]
        s = grad[ja]
        for b in range(m):
            A[a, b] = G[ja, act[b]]
            s += G[ja, act[b]] * beta[act[b]]
        rhs[a] = s - lam * np.sign(beta[ja])
    try:
        sol = np.linalg.solve(A, rhs)
    except Exception:
        return False
    for a in range(m):
        if not np.isfinite(sol[a]) or np.sign(sol[a]) != np.sign(beta[act[a]]):
            return False
    for a in range(m):
        ja = act[a]
        d = sol[a] - beta[ja]
        if d != 0.0:
            beta[ja] = sol[a]
            for k in range(G.shape[0]):
                grad[k] -= G[ja, k] * d
    return True


@njit(cache=True, nogil=True)
def _cd_path(G, c, lambdas, beta0, usable, tol, max_sweeps):
    p = G.shape[0]
    L = lambdas.shape[0]
    betas = np.zeros((L, p))
    sweeps = np.zeros(L, dtype=np.int64)
    conv = np.zeros(L, dtype=np.bool_)
    beta = beta0.copy()
    grad = c.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for k in range(p):
                grad[k] -= G[k, j] * beta[j]
    for li in range(L):
        lam = lambdas[li]
        n_sw = 0
        done = False
        while n_sw < max_sweeps and not done:
            maxd = 0.0
            for j in range(p):
                if usable[j]:
                    d = _update(j, beta, grad, G, lam)
                    if d > maxd:
                        maxd = d
            n_sw += 1
            if maxd < tol:
                done = True
                break
            # iterate on the current nonzero set, then re-check with a full sweep
            inner = 0
            while n_sw < max_sweeps:
                maxd = 0.0
                for j in range(p):
                    if beta[j] != 0.0:
                        d = _update(j, beta, grad, G, lam)
                        if d > maxd:
                            maxd = d
                n_sw += 1
                inner += 1
                if maxd < tol:
                    break
                if inner % _POLISH_EVERY == 0:
                    _polish(beta, grad, G, lam)
        betas[li] = beta
        sweeps[li] = n_sw
        conv[li] = done
    return betas, sweeps, conv


class _Standardized:
    """Column means/scales and the Gram system of a standardized design."""

    def __init__(self, X: np.ndarray, y: np.ndarray):
        n = X.shape[0]
        self.n = n
        self.x_mean = X.mean(axis=0)
        self.y_mean = float(y.mean())
        Xc = X - self.x_mean
        sd = np.sqrt(np.einsum("ij,ij->j", Xc, Xc) / n)
        scale = np.maximum(1.0, np.abs(X).max(axis=0))
        self.usable = sd > _DEGENERATE_RTOL * scale
        self.x_sd = np.where(self.usable, sd, 1.0)
        Xs = Xc / self.x_sd
        Xs[:, ~self.usable] = 0.0
        yc = y - self.y_mean
        if np.all(y == y[0]):
            yc[:] = 0.0
        self.G = Xs.T @ Xs / n
        self.G[~self.usable, ~self.usable] = 1.0
        self.c = Xs.T @ yc / n

    @property
    def degenerate(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(~self.usable))

    def to_original(self, beta_std: np.ndarray) -> tuple[float, np.ndarray]:
        slopes = np.where(self.usable, beta_std / self.x_sd, 0.0)
        return self.y_mean - float(self.x_mean @ slopes), slopes


def _check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has length {y.shape[0]}")
    if X.shape[0] < 1:
        raise ValueError("empty design")
    return X, y


def _lambda_max(std: _Standardized) -> float:
    if std.c.size == 0:
        return 0.0
    return float(np.max(np.abs(std.c)))


def _warn_degenerate(cols: tuple[int, ...]) -> None:
    if cols:
        warnings.warn(
            f"zero-variance columns {list(cols)} held at zero", DegenerateColumn, stacklevel=3
        )


def lasso_fit(X, y, lam: float, warm_start: Optional[np.ndarray] = None) -> LassoFit:
    """Fit the LASSO at a single penalty.

    ``warm_start`` holds original-scale slopes used as the starting point.
    Zero-variance columns are excluded and reported in ``degenerate``.
    """
    X, y = _check_xy(X, y)
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    std = _Standardized(X, y)
    _warn_degenerate(std.degenerate)
    beta0 = np.zeros(X.shape[1])
    if warm_start is not None:
        beta0 = np.where(std.usable, np.asarray(warm_start, dtype=float) * std.x_sd, 0.0)
    betas, sweeps, conv = _cd_path(
        std.G, std.c, np.array([float(lam)]), beta0, std.usable, TOL, MAX_SWEEPS
    )
    intercept, slopes = std.to_original(betas[0])
    return LassoFit(intercept, slopes, float(lam), int(sweeps[0]), bool(conv[0]), std.degenerate)


def lasso_path(X, y, lambdas) -> list[LassoFit]:
    """Warm-started fits along ``lambdas`` (in the given order)."""
    X, y = _check_xy(X, y)
    lambdas = np.asarray(lambdas, dtype=float)
    std = _Standardized(X, y)
    _warn_degenerate(std.degenerate)
    betas, sweeps, conv = _cd_path(
        std.G, std.c, lambdas, np.zeros(X.shape[1]), std.usable, TOL, MAX_SWEEPS
    )
    fits = []
    for li, lam in enumerate(lambdas):
        intercept, slopes = std.to_original(betas[li])
        fits.append(
            LassoFit(intercept, slopes, float(lam), int(sweeps[li]), bool(conv[li]), std.degenerate)
        )
    return fits


def _grid_from_max(lmax: float, n_lambda: int, ratio: float) -> np.ndarray:
    if lmax <= 0.0:
        return np.array([0.0])
    grid = np.exp(np.linspace(np.log(lmax), np.log(lmax * ratio), n_lambda))
    # exp(log(x)) can land one ulp below x, which would let a coefficient in
    grid[0] = lmax
    return grid


def lambda_grid(X, y, n_lambda: int = 100, ratio: float = 1e-3) -> np.ndarray:
    """Log-spaced penalties from ``lambda_max`` down to ``ratio * lambda_max``.

    A constant response gives ``lambda_max = 0`` and the grid ``[0]``.
    """
    if n_lambda < 2:
        raise ValueError("n_lambda must be at least 2")
    X, y = _check_xy(X, y)
    lmax = _lambda_max(_Standardized(X, y))
    if lmax <= 0.0:
        warnings.warn("constant response; lambda grid is [0]", AllZeroResponse, stacklevel=2)
    return _grid_from_max(lmax, n_lambda, ratio)


def assign_folds(n: int, n_folds: int, rng) -> np.ndarray:
    """Fold label per row from a random permutation; sizes differ by at most one."""
    perm = as_generator(rng).permutation(n)
    fold_ids = np.empty(n, dtype=np.int64)
    fold_ids[perm] = np.arange(n) % n_folds
    return fold_ids


def cv_lasso(
    X,
    y,
    n_folds: int = 10,
    rng=None,
    n_lambda: int = 100,
    ratio: float = 1e-3,
) -> tuple[CvResult, LassoFit]:
    """K-fold cross-validated LASSO with the one-standard-error rule.

    Returns the CV curve and the all-rows fit at ``lambda_1se``, the
    largest grid penalty whose mean CV error is within one standard error
    of the minimum.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if not 2 <= n_folds <= n:
        raise ValueError(f"need 2 <= n_folds <= n, got n_folds={n_folds}, n={n}")
    if rng is None:
        rng = 0
    fold_ids = assign_folds(n, n_folds, rng)

    full = _Standardized(X, y)
    lmax = _lambda_max(full)
    grid = _grid_from_max(lmax, n_lambda, ratio)

    # fold Gram systems from per-fold cross products of globally centred data
    Xc = X - full.x_mean
    yc = y - full.y_mean
    if lmax == 0.0:
        yc[:] = 0.0
    tot_xx = Xc.T @ Xc
    tot_xy = Xc.T @ yc
    tot_x = Xc.sum(axis=0)
    tot_y = yc.sum()
    scale = np.maximum(1.0, np.abs(X).max(axis=0))
    errors = np.empty((n_folds, grid.size))
    for k in range(n_folds):
        held = fold_ids == k
        Xh, yh = Xc[held], yc[held]
        nt = n - Xh.shape[0]
        sx = tot_x - Xh.sum(axis=0)
        sy = tot_y - yh.sum()
        mu = sx / nt
        my = sy / nt
        sxx = (tot_xx - Xh.T @ Xh) - nt * np.outer(mu, mu)
        sxy = (tot_xy - Xh.T @ yh) - nt * mu * my
        var = np.maximum(np.diag(sxx) / nt, 0.0)
        sd = np.sqrt(var)
        usable = sd > _DEGENERATE_RTOL * scale
        sd = np.where(usable, sd, 1.0)
        G = sxx / nt / np.outer(sd, sd)
        G[~usable, :] = 0.0
        G[:, ~usable] = 0.0
        G[~usable, ~usable] = 1.0
        c = np.where(usable, sxy / nt / sd, 0.0)
        betas, _, _ = _cd_path(G, c, grid, np.zeros(p), usable, TOL, MAX_SWEEPS)
        slopes = np.where(usable, betas / sd, 0.0)
        pred = my + (Xh - mu) @ slopes.T
        errors[k] = np.mean((yh[:, None] - pred) ** 2, axis=0)

    mean_err = errors.mean(axis=0)
    se = errors.std(axis=0, ddof=1) / np.sqrt(n_folds)
    i_min = int(np.argmin(mean_err))
    bound = mean_err[i_min] + se[i_min]
    i_1se = int(np.flatnonzero(mean_err <= bound)[0])
    cv = CvResult(grid, mean_err, se, float(grid[i_min]), float(grid[i_1se]), fold_ids)

    betas, sweeps, conv = _cd_path(
        full.G, full.c, grid[: i_1se + 1], np.zeros(p), full.usable, TOL, MAX_SWEEPS
    )
    intercept, slopes = full.to_original(betas[-1])
    fit = LassoFit(
        intercept, slopes, float(grid[i_1se]), int(sweeps[-1]), bool(conv[-1]), full.degenerate
    )
    return cv, fit
