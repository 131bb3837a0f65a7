"""Sample covariance, symmetric eigendecomposition and principal components."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ConvergenceError, InvalidDataError

DEGENERATE_GAP = 1e-10


def as_data_matrix(X, min_rows: int = 2, min_cols: int = 2) -> np.ndarray:
    """Validate ``X`` as an n x p matrix of finite reals and return it as float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidDataError(f"expected a 2-D matrix, got shape {X.shape}")
    n, p = X.shape
    if n < min_rows:
        raise InvalidDataError(f"need at least {min_rows} observations, got {n}")
    if p < min_cols:
        raise InvalidDataError(f"need at least {min_cols} variables, got {p}")
    if not np.all(np.isfinite(X)):
        raise InvalidDataError("data contains non-finite values")
    return X


def covariance(X) -> np.ndarray:
    """Centered cross-moment matrix with the 1/n normalizer.

    The result is symmetrized explicitly so that entry (i, j) and (j, i)
    are bit-identical.
    """
    X = as_data_matrix(X, min_cols=1)
    Xc = X - X.mean(axis=0)
    # a constant column has an exactly zero deviation, whatever the rounding of its mean
    Xc[:, np.all(X == X[0], axis=0)] = 0.0
    S = Xc.T @ Xc / X.shape[0]
    return (S + S.T) / 2.0


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs sorted by decreasing eigenvalue.

    ``vectors[:, k]`` is the k-th eigenvector, sign-canonicalized so its
    largest-magnitude coordinate is positive.
    """

    values: np.ndarray
    vectors: np.ndarray
    degenerate: bool = False

    def __len__(self) -> int:
        return self.values.shape[0]

    def truncate(self, q: int) -> "EigenSystem":
        if not 1 <= q <= len(self):
            raise ArgumentError(f"q must be in [1, {len(self)}], got {q}")
        return EigenSystem(self.values[:q].copy(), self.vectors[:, :q].copy(), self.degenerate)

    def explained_ratio(self, total: float | None = None) -> np.ndarray:
        total = float(np.sum(self.values)) if total is None else total
        if total <= 0:
            return np.zeros_like(self.values)
        return self.values / total


def canonicalize_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest |coordinate| is positive (lowest index on ties)."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    mag = np.abs(vectors)
    # near-equal magnitudes count as tied so rounding cannot pick the sign
    lead = np.argmax(mag >= mag.max(axis=0) - 1e-12, axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def jacobi_eigh(S, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi rotations for a real symmetric matrix.

    Returns ``(values, vectors)`` unsorted. Sweeps stop once the off-diagonal
    Frobenius norm falls below ``tol`` times the matrix norm.
    """
    A = np.array(S, dtype=np.float64, copy=True)
    p = A.shape[0]
    V = np.eye(p)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    for sweep in range(1, max_sweeps + 1):
        if _off_norm(A) <= tol * scale:
            return np.diag(A).copy(), V
        for i in range(p - 1):
            for j in range(i + 1, p):
                if A[i, j] == 0.0:
                    continue
                theta = (A[j, j] - A[i, i]) / (2.0 * A[i, j])
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                Ai, Aj = A[:, i].copy(), A[:, j].copy()
                A[:, i] = c * Ai - s * Aj
                A[:, j] = s * Ai + c * Aj
                Ai, Aj = A[i, :].copy(), A[j, :].copy()
                A[i, :] = c * Ai - s * Aj
                A[j, :] = s * Ai + c * Aj
                Vi, Vj = V[:, i].copy(), V[:, j].copy()
                V[:, i] = c * Vi - s * Vj
                V[:, j] = s * Vi + c * Vj
    if _off_norm(A) <= tol * scale:
        return np.diag(A).copy(), V
    raise ConvergenceError(f"Jacobi did not converge after {max_sweeps} sweeps", iterations=max_sweeps)


def _off_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def _check_symmetric(S) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidDataError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InvalidDataError("matrix contains non-finite values")
    scale = max(np.max(np.abs(S)), 1.0) if S.size else 1.0
    if np.max(np.abs(S - S.T), initial=0.0) > 1e-12 * scale:
        raise InvalidDataError("matrix is not symmetric")
    return (S + S.T) / 2.0


def eigendecompose(S, method: str = "lapack") -> EigenSystem:
    """Full eigensystem of a symmetric matrix, eigenvalues in decreasing order.

    ``method="lapack"`` uses :func:`numpy.linalg.eigh`; ``method="jacobi"``
    uses the pure-numpy :func:`jacobi_eigh`.
    """
    S = _check_symmetric(S)
    if method == "lapack":
        try:
            values, vectors = np.linalg.eigh(S)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(str(exc), iterations=None) from exc
    elif method == "jacobi":
        values, vectors = jacobi_eigh(S)
    else:
        raise ArgumentError(f"unknown eigen method {method!r}")
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = canonicalize_signs(vectors[:, order])
    top = max(abs(values[0]), np.finfo(float).tiny) if values.size else 1.0
    gaps = -np.diff(values)
    degenerate = bool(np.any(gaps < DEGENERATE_GAP * top))
    return EigenSystem(values, vectors, degenerate)


def principal_components(X, q: int | None = None, method: str = "lapack") -> EigenSystem:
    """First ``q`` eigenpairs of the sample covariance of ``X`` (all when q is None)."""
    X = as_data_matrix(X)
    p = X.shape[1]
    q = p if q is None else q
    if not 1 <= q <= p:
        raise ArgumentError(f"q must be in [1, {p}], got {q}")
    return eigendecompose(covariance(X), method=method).truncate(q)
