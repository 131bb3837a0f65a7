"""Jolliffe's B2 (discard) and B4 (retain) variable-selection rules."""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .pca import as_data_matrix, covariance, eigendecompose


def _loadings(X) -> np.ndarray:
    return np.abs(eigendecompose(covariance(as_data_matrix(X))).vectors)


def _loadings_from_cov(cov) -> np.ndarray:
    return np.abs(eigendecompose(np.asarray(cov, dtype=np.float64)).vectors)


def _b2(L: np.ndarray, keep: int) -> tuple[int, ...]:
    p = L.shape[0]
    if not 1 <= keep < p:
        raise ArgumentError(f"keep must be in [1, {p - 1}], got {keep}")
    alive = np.ones(p, dtype=bool)
    for k in range(p - 1, keep - 1, -1):
        masked = np.where(alive, L[:, k], -np.inf)
        alive[int(np.argmax(masked))] = False
    return tuple(int(i) for i in np.flatnonzero(alive))


def _b4(L: np.ndarray, keep: int) -> tuple[int, ...]:
    p = L.shape[0]
    if not 1 <= keep <= p:
        raise ArgumentError(f"keep must be in [1, {p}], got {keep}")
    taken = np.zeros(p, dtype=bool)
    for k in range(keep):
        masked = np.where(taken, -np.inf, L[:, k])
        taken[int(np.argmax(masked))] = True
    return tuple(int(i) for i in np.flatnonzero(taken))


def b2(X, keep: int) -> tuple[int, ...]:
    """Delete, for each of the last p - keep components (last first), the
    surviving variable with the largest absolute loading."""
    return _b2(_loadings(X), keep)


def b4(X, keep: int) -> tuple[int, ...]:
    """Retain, for each of the first ``keep`` components, the not-yet-retained
    variable with the largest absolute loading."""
    return _b4(_loadings(X), keep)


def b2_from_cov(cov, keep: int) -> tuple[int, ...]:
    return _b2(_loadings_from_cov(cov), keep)


def b4_from_cov(cov, keep: int) -> tuple[int, ...]:
    return _b4(_loadings_from_cov(cov), keep)
