"""Nearest-neighbour local means/medians and GCV choice of the neighbour count."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError, InvalidDataError, NumericError

# Above this many rows neighbour lists come from a k-d tree instead of
# brute-force distance rows.
BRUTE_FORCE_LIMIT = 6000
_CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class Metric:
    """Distance on the retained coordinates.

    ``precision`` is only used for ``kind="mahalanobis"``; when omitted it is
    estimated from the coordinates being searched (inverse sample covariance).
    """

    kind: str = "euclidean"
    precision: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("euclidean", "mahalanobis"):
            raise ArgumentError(f"unknown metric {self.kind!r}")
        if self.precision is not None:
            P = np.asarray(self.precision, dtype=np.float64)
            if P.ndim != 2 or P.shape[0] != P.shape[1] or not np.allclose(P, P.T):
                raise ArgumentError("precision must be a symmetric square matrix")
            try:
                np.linalg.cholesky(P)
            except np.linalg.LinAlgError as exc:
                raise ArgumentError("precision must be positive definite") from exc

    def transform(self, Z: np.ndarray) -> np.ndarray:
        """Map ``Z`` so that Euclidean distance on the result equals this metric."""
        Z = np.asarray(Z, dtype=np.float64)
        if self.kind == "euclidean":
            return Z
        P = self.precision if self.precision is not None else mahalanobis_precision(Z)
        P = np.asarray(P, dtype=np.float64)
        if P.shape != (Z.shape[1], Z.shape[1]):
            raise ArgumentError(f"precision shape {P.shape} does not match {Z.shape[1]} coordinates")
        L = np.linalg.cholesky(P)
        return Z @ L


def mahalanobis_precision(Z: np.ndarray) -> np.ndarray:
    """Inverse sample covariance of ``Z``, ridge-regularized when singular."""
    Z = np.asarray(Z, dtype=np.float64)
    Zc = Z - Z.mean(axis=0)
    C = Zc.T @ Zc / Z.shape[0]
    C = (C + C.T) / 2.0
    d = C.shape[0]
    try:
        np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        ridge = 1e-10 * np.trace(C) / d
        if ridge <= 0:
            ridge = 1e-10
        C = C + ridge * np.eye(d)
        try:
            np.linalg.cholesky(C)
        except np.linalg.LinAlgError as exc:
            raise NumericError("covariance of retained coordinates is not invertible") from exc
    P = np.linalg.inv(C)
    return (P + P.T) / 2.0


@dataclass(frozen=True)
class NeighborConfig:
    r: int | str = "auto"
    r_grid: Sequence[int] | None = None
    estimator: str = "mean"
    shared_r: bool = False

    def __post_init__(self):
        if self.estimator not in ("mean", "median"):
            raise ArgumentError(f"unknown estimator {self.estimator!r}")
        if self.r != "auto" and (not isinstance(self.r, (int, np.integer)) or self.r < 1):
            raise ArgumentError(f"r must be a positive integer or 'auto', got {self.r!r}")
        if self.r_grid is not None and len(self.r_grid) == 0:
            raise ArgumentError("r_grid must not be empty")


def default_grid(n: int) -> list[int]:
    """{2, ..., ceil(n/2)} together with n."""
    top = max(2, math.ceil(n / 2))
    grid = list(range(2, top + 1))
    if n not in grid:
        grid.append(n)
    return [r for r in grid if r <= n]


def _as_points(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.ndim != 2 or Z.shape[0] < 1:
        raise InvalidDataError(f"expected an n x d matrix, got shape {Z.shape}")
    return Z


def neighbor_index(Z, k: int, metric: Metric | None = None) -> np.ndarray:
    """Indices of the ``k`` nearest rows of ``Z`` for every row, self included.

    Row j of the result lists neighbours by increasing distance, ties broken
    by ascending index.
    """
    Z = _as_points(Z)
    n = Z.shape[0]
    if not 1 <= k <= n:
        raise ArgumentError(f"neighbour count must be in [1, {n}], got {k}")
    W = (metric or Metric()).transform(Z)
    if n > BRUTE_FORCE_LIMIT and k < n:
        return _kdtree_index(W, k)
    out = np.empty((n, k), dtype=np.intp)
    step = max(1, _CHUNK_ELEMS // max(1, n * W.shape[1]))
    for start in range(0, n, step):
        stop = min(n, start + step)
        diff = W[start:stop, None, :] - W[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        # stable sort keeps equal distances in index order
        out[start:stop] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def _kdtree_index(W: np.ndarray, k: int) -> np.ndarray:
    from scipy.spatial import cKDTree

    n = W.shape[0]
    tree = cKDTree(W)
    extra = 4
    while True:
        kq = min(n, k + extra)
        _, cand = tree.query(W, k=kq)
        cand = cand.reshape(n, kq)
        # re-rank candidates by the same squared distance the brute-force path uses
        diff = W[:, None, :] - W[cand]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        rank = np.argsort(cand, axis=1, kind="stable")
        cand = np.take_along_axis(cand, rank, axis=1)
        dist = np.take_along_axis(dist, rank, axis=1)
        rank = np.argsort(dist, axis=1, kind="stable")
        cand = np.take_along_axis(cand, rank, axis=1)
        dist = np.take_along_axis(dist, rank, axis=1)
        # a tie straddling the last candidate could hide a lower index beyond it
        if kq == n or np.all(dist[:, k - 1] < dist[:, kq - 1]):
            return cand[:, :k].astype(np.intp)
        extra *= 4


def neighbor_sets(Z, r: int, metric: Metric | None = None) -> list[np.ndarray]:
    """The r-nearest-neighbour index set of every row (self included)."""
    idx = neighbor_index(Z, r, metric)
    return [row.copy() for row in idx]


def local_estimate(X, C, i: int, estimator: str = "mean") -> np.ndarray:
    """Mean (or median) of column ``i`` of ``X`` over each neighbour set."""
    X = np.asarray(X, dtype=np.float64)
    col = X[:, i]
    if isinstance(C, np.ndarray) and C.ndim == 2:
        vals = col[C]
        return vals.mean(axis=1) if estimator == "mean" else np.median(vals, axis=1)
    if estimator == "mean":
        return np.array([col[c].mean() for c in C])
    if estimator == "median":
        return np.array([np.median(col[c]) for c in C])
    raise ArgumentError(f"unknown estimator {estimator!r}")


def local_fits(target: np.ndarray, idx: np.ndarray, grid: Sequence[int], estimator: str = "mean") -> np.ndarray:
    """Local estimates of ``target`` for every r in ``grid``.

    ``target`` is an n-vector or an n x m matrix of columns; the result has
    shape (len(grid), n) or (len(grid), n, m). ``idx`` must hold at least
    max(r < n) neighbours per row; r equal to the sample size uses the whole
    column.
    """
    target = np.asarray(target, dtype=np.float64)
    n = target.shape[0]
    out = np.empty((len(grid),) + target.shape)
    if estimator == "mean":
        sub = [(g, r) for g, r in enumerate(grid) if r < n]
        if sub:
            kmax = max(r for _, r in sub)
            width = kmax * (target.shape[1] if target.ndim == 2 else 1)
            rows = max(1, _CHUNK_ELEMS // width)
            cols = np.array([r - 1 for _, r in sub])
            div = np.array([r for _, r in sub], dtype=np.float64)
            div = div.reshape((1, -1) + (1,) * (target.ndim - 1))
            gpos = [g for g, _ in sub]
            for start in range(0, n, rows):
                stop = min(n, start + rows)
                cs = np.cumsum(target[idx[start:stop, :kmax]], axis=1)
                out[gpos, start:stop] = np.moveaxis(cs[:, cols] / div, 1, 0)
        for g, r in enumerate(grid):
            if r >= n:
                out[g] = target.mean(axis=0)
    elif estimator == "median":
        for g, r in enumerate(grid):
            out[g] = np.median(target, axis=0) if r >= n else np.median(target[idx[:, :r]], axis=1)
    else:
        raise ArgumentError(f"unknown estimator {estimator!r}")
    return out


def gcv_scores(target, idx: np.ndarray, grid: Sequence[int], estimator: str = "mean") -> np.ndarray:
    """GCV criterion mean((x - fit_r)^2) / (1 - 1/r)^2 for each r in ``grid``."""
    grid = list(grid)
    if any(r < 2 for r in grid):
        raise ArgumentError("GCV grid values must be >= 2")
    fits = local_fits(target, idx, grid, estimator)
    rss = np.mean((np.asarray(target)[None, :] - fits) ** 2, axis=1)
    r = np.asarray(grid, dtype=np.float64)
    return rss / (1.0 - 1.0 / r) ** 2


def gcv_numerator(target, idx: np.ndarray, r: int, estimator: str = "mean") -> float:
    fit = local_fits(target, idx, [r], estimator)[0]
    return float(np.mean((np.asarray(target) - fit) ** 2))


def pick_r(scores: np.ndarray, grid: Sequence[int]) -> int:
    """Grid value with the smallest score, smallest r on ties."""
    scores = np.asarray(scores)
    best = np.min(scores)
    return int(min(r for r, s in zip(grid, scores) if s == best))


def validate_grid(grid: Sequence[int] | None, n: int) -> list[int]:
    grid = default_grid(n) if grid is None else sorted({int(r) for r in grid})
    if not grid:
        raise ArgumentError("GCV grid is empty")
    if grid[0] < 2 or grid[-1] > n:
        raise ArgumentError(f"GCV grid must lie in [2, {n}]")
    return grid


def gcv_select_r(X, I: Sequence[int], i: int, grid: Sequence[int] | None = None,
                 metric: Metric | None = None, estimator: str = "mean") -> int:
    """Neighbour count minimizing the GCV criterion when predicting column ``i`` from ``I``."""
    X = np.asarray(X, dtype=np.float64)
    I = list(I)
    if i in I:
        raise ArgumentError(f"column {i} is part of the retained subset")
    n = X.shape[0]
    grid = validate_grid(grid, n)
    k = max([r for r in grid if r < n], default=1)
    idx = neighbor_index(X[:, I], k, metric)
    return pick_r(gcv_scores(X[:, i], idx, grid, estimator), grid)
