"""Blinded samples: variables outside a subset replaced by conditional-mean estimates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, NumericError
from .knn import (
    Metric,
    NeighborConfig,
    gcv_scores,
    local_fits,
    neighbor_index,
    pick_r,
    validate_grid,
)
from .pca import as_data_matrix


def as_subset(I: Sequence[int], p: int) -> tuple[int, ...]:
    """Validate a 0-based index subset of ``range(p)`` and return it sorted."""
    subset = tuple(sorted(int(i) for i in I))
    if not subset:
        raise ArgumentError("subset must not be empty")
    if len(set(subset)) != len(subset):
        raise ArgumentError(f"subset has duplicate indices: {list(I)}")
    if subset[0] < 0 or subset[-1] >= p:
        raise ArgumentError(f"subset indices must lie in [0, {p - 1}]: {list(I)}")
    return subset


@dataclass(frozen=True)
class BlindedSample:
    values: np.ndarray
    subset: tuple[int, ...]
    r_used: dict[int, int]
    metric: str
    estimator: str


def blind(X, I: Sequence[int], cfg: NeighborConfig | None = None,
          metric: Metric | None = None) -> BlindedSample:
    """Replace every column outside ``I`` by its r-nearest-neighbour local estimate.

    Neighbours are searched on the ``I`` columns only, each row counting as its
    own neighbour. With ``cfg.r == "auto"`` the neighbour count is chosen by
    GCV, separately per column unless ``cfg.shared_r`` is set.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    cfg = cfg or NeighborConfig()
    metric = metric or Metric()
    subset = as_subset(I, p)
    others = [i for i in range(p) if i not in subset]
    Y = X.copy()
    if not others:
        return BlindedSample(Y, subset, {}, metric.kind, cfg.estimator)

    if cfg.r == "auto":
        grid = validate_grid(cfg.r_grid, n)
    else:
        if cfg.r > n:
            raise ArgumentError(f"r={cfg.r} exceeds the sample size {n}")
        grid = [int(cfg.r)]
    k = max([r for r in grid if r < n], default=1)
    idx = neighbor_index(X[:, list(subset)], k, metric)

    r_used: dict[int, int] = {}
    fits = local_fits(X[:, others], idx, grid, cfg.estimator)
    if cfg.r != "auto":
        Y[:, others] = fits[0]
        r_used = {i: int(cfg.r) for i in others}
    else:
        denom = (1.0 - 1.0 / np.asarray(grid, dtype=np.float64)) ** 2
        scores = np.mean((X[None, :, others] - fits) ** 2, axis=1) / denom[:, None]
        if cfg.shared_r:
            g_shared = grid.index(pick_r(scores.sum(axis=1), grid))
            picks = [g_shared] * len(others)
        else:
            picks = [grid.index(pick_r(scores[:, c], grid)) for c in range(len(others))]
        for c, (i, g) in enumerate(zip(others, picks)):
            Y[:, i] = fits[g, :, c]
            r_used[i] = grid[g]
    return BlindedSample(Y, subset, r_used, metric.kind, cfg.estimator)


def gcv_profile(X, I: Sequence[int], i: int, cfg: NeighborConfig | None = None,
                metric: Metric | None = None) -> tuple[list[int], np.ndarray]:
    """GCV criterion over the grid for one blinded column (for diagnostics)."""
    X = as_data_matrix(X)
    cfg = cfg or NeighborConfig()
    subset = as_subset(I, X.shape[1])
    grid = validate_grid(cfg.r_grid, X.shape[0])
    k = max([r for r in grid if r < X.shape[0]], default=1)
    idx = neighbor_index(X[:, list(subset)], k, metric)
    return grid, gcv_scores(X[:, i], idx, grid, cfg.estimator)


@dataclass(frozen=True)
class GaussianModel:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or not np.allclose(cov, cov.T):
            raise ArgumentError("covariance must be a symmetric square matrix")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericError("covariance is not positive definite") from exc

    @property
    def p(self) -> int:
        return np.asarray(self.cov).shape[0]


def conditional_mean_operator(cov, I: Sequence[int]) -> np.ndarray:
    """Matrix A with Y = A X, where Y[i] = E(X[i] | X[I]) for a Gaussian X.

    Rows in ``I`` are identity rows; the others hold cov[i, I] cov[I, I]^-1.
    """
    cov = np.asarray(cov, dtype=np.float64)
    p = cov.shape[0]
    subset = list(as_subset(I, p))
    A = np.zeros((p, p))
    A[subset, subset] = 1.0
    others = [i for i in range(p) if i not in subset]
    if others:
        S_II = cov[np.ix_(subset, subset)]
        try:
            L = np.linalg.cholesky(S_II)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"covariance restricted to {subset} is singular") from exc
        coef = np.linalg.solve(L.T, np.linalg.solve(L, cov[np.ix_(subset, others)]))
        A[np.ix_(others, subset)] = coef.T
    return A


def blind_population_gaussian(model: GaussianModel | np.ndarray, I: Sequence[int]) -> np.ndarray:
    """Covariance of the population blinded vector under a Gaussian model."""
    cov = np.asarray(model.cov if isinstance(model, GaussianModel) else model, dtype=np.float64)
    A = conditional_mean_operator(cov, I)
    S = A @ cov @ A.T
    subset = list(as_subset(I, cov.shape[0]))
    # retained block is the original covariance exactly
    S[np.ix_(subset, subset)] = cov[np.ix_(subset, subset)]
    return (S + S.T) / 2.0
