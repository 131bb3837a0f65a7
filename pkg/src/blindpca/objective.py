"""Distances between original and blinded principal components."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .blinding import as_subset, blind, blind_population_gaussian
from .errors import ArgumentError
from .knn import Metric, NeighborConfig
from .pca import EigenSystem, as_data_matrix, covariance, eigendecompose

# Blinded eigenvalues below this fraction of the leading one are treated as
# zero: their eigenvectors are an arbitrary basis of a null space.
RANK_TOL = 1e-10


def make_weights(scheme, eigenvalues: Sequence[float] | None, q: int) -> np.ndarray:
    """Component weights p_k for ``scheme`` in {"equal", "variance"} or an explicit sequence."""
    if q < 1:
        raise ArgumentError(f"q must be >= 1, got {q}")
    if isinstance(scheme, str):
        if scheme == "equal":
            return np.full(q, 1.0 / q)
        if scheme == "variance":
            lam = np.asarray(eigenvalues, dtype=np.float64)[:q]
            if lam.shape[0] < q:
                raise ArgumentError(f"need {q} eigenvalues, got {lam.shape[0]}")
            if np.any(lam < 0):
                raise ArgumentError("eigenvalues must be nonnegative")
            total = lam.sum()
            if total <= 0:
                raise ArgumentError("variance weights need a positive eigenvalue")
            return lam / total
        raise ArgumentError(f"unknown weight scheme {scheme!r}")
    w = np.asarray(scheme, dtype=np.float64)
    if w.shape != (q,):
        raise ArgumentError(f"expected {q} weights, got {w.shape}")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ArgumentError("custom weights must be nonnegative and sum to 1")
    return w


def component_distance(a, b) -> tuple[float, float]:
    """Sign-invariant squared distance and angle (degrees) between unit vectors.

    With c = |a . b| this is h = 2(1 - c), angle = arccos(c). Both are
    computed from the chord |a -+ b| so identical vectors give exactly 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if abs(np.linalg.norm(a) - 1.0) > 1e-8 or abs(np.linalg.norm(b) - 1.0) > 1e-8:
        raise ArgumentError("component_distance needs unit vectors")
    s = -1.0 if float(a @ b) < 0 else 1.0
    h = min(float(np.sum((a - s * b) ** 2)), 2.0)
    if h == 2.0:
        return h, 90.0
    return h, math.degrees(2.0 * math.asin(min(math.sqrt(h) / 2.0, 1.0)))


@dataclass(frozen=True)
class ObjectiveReport:
    subset: tuple[int, ...]
    h_k: np.ndarray
    angles: np.ndarray
    h: float
    weights: np.ndarray
    q: int
    degenerate: bool = False
    unidentified: tuple[int, ...] = ()
    r_used: dict[int, int] = field(default_factory=dict)

    @property
    def max_angle(self) -> float:
        return float(np.max(self.angles))

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        out = {
            "subset": [int(i) for i in self.subset],
            "q": self.q,
            "h": float(self.h),
            "h_k": [float(v) for v in self.h_k],
            "angles_deg": [float(v) for v in self.angles],
            "max_angle_deg": self.max_angle,
            "weights": [float(v) for v in self.weights],
            "degenerate": self.degenerate,
            "unidentified_components": [int(k) for k in self.unidentified],
            "r_used": {str(k): int(v) for k, v in sorted(self.r_used.items())},
        }
        if names is not None:
            out["subset_names"] = [names[i] for i in self.subset]
        return out


def compare_components(original: EigenSystem, blinded: EigenSystem, weights: np.ndarray,
                       subset: tuple[int, ...] = (), r_used: dict | None = None) -> ObjectiveReport:
    """Per-component distances between two eigensystems, weighted into h.

    Blinded components past the numerical rank of the blinded covariance are
    not identified by it; they score the maximal distance (90 degrees, h = 2).
    """
    q = weights.shape[0]
    top = max(float(blinded.values[0]), 0.0)
    h_k = np.empty(q)
    angles = np.empty(q)
    unidentified = []
    for k in range(q):
        if blinded.values[k] <= RANK_TOL * top:
            h_k[k], angles[k] = 2.0, 90.0
            unidentified.append(k)
        else:
            h_k[k], angles[k] = component_distance(original.vectors[:, k], blinded.vectors[:, k])
    return ObjectiveReport(
        subset=subset,
        h_k=h_k,
        angles=angles,
        h=float(weights @ h_k),
        weights=weights,
        q=q,
        degenerate=bool(original.degenerate or blinded.degenerate),
        unidentified=tuple(unidentified),
        r_used=dict(r_used or {}),
    )


class EmpiricalScorer:
    """Scores subsets of a sample by kNN blinding; results are cached per subset."""

    def __init__(self, X, q: int = 2, weights="variance", neighbors: NeighborConfig | None = None,
                 metric: Metric | None = None):
        self.X = as_data_matrix(X)
        self.p = self.X.shape[1]
        if not 1 <= q <= self.p:
            raise ArgumentError(f"q must be in [1, {self.p}], got {q}")
        self.q = q
        self.neighbors = neighbors or NeighborConfig()
        self.metric = metric or Metric()
        self.original = eigendecompose(covariance(self.X))
        self.weights = make_weights(weights, self.original.values, q)
        self._cache: dict[tuple[int, ...], ObjectiveReport] = {}
        self.evaluations = 0

    def blinded_sample(self, I):
        return blind(self.X, I, self.neighbors, self.metric)

    def __call__(self, I) -> ObjectiveReport:
        subset = as_subset(I, self.p)
        if subset not in self._cache:
            self.evaluations += 1
            Y = self.blinded_sample(subset)
            # nothing blinded: reuse the original eigensystem so h is exactly 0
            blinded = self.original if len(subset) == self.p else eigendecompose(covariance(Y.values))
            self._cache[subset] = compare_components(self.original, blinded, self.weights, subset, Y.r_used)
        return self._cache[subset]


class PopulationScorer:
    """Scores subsets against a known covariance with exact linear conditional means."""

    def __init__(self, cov, q: int = 2, weights="variance"):
        self.cov = np.asarray(cov, dtype=np.float64)
        self.p = self.cov.shape[0]
        if not 1 <= q <= self.p:
            raise ArgumentError(f"q must be in [1, {self.p}], got {q}")
        self.q = q
        self.original = eigendecompose(self.cov)
        self.weights = make_weights(weights, self.original.values, q)
        self._cache: dict[tuple[int, ...], ObjectiveReport] = {}
        self.evaluations = 0

    def __call__(self, I) -> ObjectiveReport:
        subset = as_subset(I, self.p)
        if subset not in self._cache:
            self.evaluations += 1
            blinded = (self.original if len(subset) == self.p
                       else eigendecompose(blind_population_gaussian(self.cov, subset)))
            self._cache[subset] = compare_components(self.original, blinded, self.weights, subset)
        return self._cache[subset]


def evaluate(X, I, q: int = 2, weights="variance", neighbors: NeighborConfig | None = None,
             metric: Metric | None = None) -> ObjectiveReport:
    """Objective of one subset on a sample. Variance weights use the sample's eigenvalues."""
    return EmpiricalScorer(X, q, weights, neighbors, metric)(I)


def evaluate_population(cov, I, q: int = 2, weights="variance") -> ObjectiveReport:
    return PopulationScorer(cov, q, weights)(I)
