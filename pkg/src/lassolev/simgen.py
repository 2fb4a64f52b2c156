"""Seeded covariate and response generation for the simulation studies."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import cholesky_factor
from .rng import StreamKey

BLOCK_ROWS = 4096

IDENTITY = "identity"
EQUICORRELATED = "equicorrelated"


@dataclass(frozen=True)
class CovarianceSpec:
    kind: str = IDENTITY
    p: int = 1
    rho: float = 0.5

    def matrix(self) -> np.ndarray:
        if self.kind == IDENTITY:
            return np.eye(self.p)
        if self.kind == EQUICORRELATED:
            return (1.0 - self.rho) * np.eye(self.p) + self.rho * np.ones((self.p, self.p))
        raise ValueError(f"unknown covariance kind {self.kind!r}")


@dataclass(frozen=True)
class Distribution:
    """``normal``, ``lognormal``, ``t`` (with ``df``) or the equal-weight ``mixture``
    of normal, lognormal, t2 and t3."""

    kind: str = "normal"
    df: float = 0.0

    def __post_init__(self):
        if self.kind not in ("normal", "lognormal", "t", "mixture"):
            raise ValueError(f"unknown distribution {self.kind!r}")
        if self.kind == "t" and self.df < 1:
            raise ValueError("t distribution needs df >= 1")

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        t = str(text).strip().lower()
        aliases = {"n": "normal", "ln": "lognormal", "mix": "mixture"}
        t = aliases.get(t, t)
        if t in ("normal", "lognormal", "mixture"):
            return cls(t)
        if t.startswith("t") and t[1:].isdigit():
            return cls("t", float(t[1:]))
        raise ValueError(f"cannot parse distribution {text!r}")

    @property
    def label(self) -> str:
        return f"t{self.df:g}" if self.kind == "t" else self.kind


@dataclass(frozen=True)
class SimConfig:
    n: int
    p: int
    p1: int
    beta_active: float = 1.0
    intercept: float = 1.0
    sigma2: float = 9.0
    dist: Distribution = field(default_factory=Distribution)
    cov: str = IDENTITY
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p1 <= self.p:
            raise ValueError(f"p1={self.p1} must lie in [0, p={self.p}]")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")

    @property
    def covariance(self) -> CovarianceSpec:
        return CovarianceSpec(self.cov, self.p)

    def beta(self) -> np.ndarray:
        """Full coefficient vector, intercept first."""
        b = np.zeros(self.p + 1)
        b[0] = self.intercept
        b[1 : self.p1 + 1] = self.beta_active
        return b

    @property
    def true_active(self) -> np.ndarray:
        return np.arange(self.p1)


def _t_scale(g: np.random.Generator, df: float, size: int) -> np.ndarray:
    return np.sqrt(g.chisquare(df, size) / df)


def _block(cfg: SimConfig, L, g: np.random.Generator, rows: int) -> np.ndarray:
    Z = g.standard_normal((rows, cfg.p))
    if L is not None:
        Z = Z @ L.T
    kind = cfg.dist.kind
    if kind == "normal":
        return Z
    if kind == "lognormal":
        return np.exp(Z)
    if kind == "t":
        return Z / _t_scale(g, cfg.dist.df, rows)[:, None]
    # mixture: draw every auxiliary variate so the stream layout is fixed
    comp = g.integers(0, 4, rows)
    s2 = _t_scale(g, 2.0, rows)
    s3 = _t_scale(g, 3.0, rows)
    out = Z.copy()
    ln = comp == 1
    out[ln] = np.exp(Z[ln])
    out[comp == 2] /= s2[comp == 2, None]
    out[comp == 3] /= s3[comp == 3, None]
    return out


def gen_covariates(cfg: SimConfig, key: StreamKey) -> np.ndarray:
    """``n x p`` covariates, generated in fixed row blocks with their own streams."""
    L = None if cfg.cov == IDENTITY else cholesky_factor(cfg.covariance.matrix())
    X = np.empty((cfg.n, cfg.p))
    for b, start in enumerate(range(0, cfg.n, BLOCK_ROWS)):
        stop = min(start + BLOCK_ROWS, cfg.n)
        g = key.derive("covariates", b).generator()
        X[start:stop] = _block(cfg, L, g, stop - start)
    return X


def gen_response(X, cfg: SimConfig, key: StreamKey) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    mean = cfg.intercept + cfg.beta_active * X[:, : cfg.p1].sum(axis=1)
    if cfg.sigma2 == 0:
        return mean
    eps = key.derive("noise").generator().standard_normal(X.shape[0])
    return mean + np.sqrt(cfg.sigma2) * eps


def generate(cfg: SimConfig, key: StreamKey) -> tuple[np.ndarray, np.ndarray]:
    X = gen_covariates(cfg, key)
    return X, gen_response(X, cfg, key)
