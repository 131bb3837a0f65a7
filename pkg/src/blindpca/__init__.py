"""Select a few original variables that reproduce the leading principal components.

Each candidate subset I is scored by "blinding" the other variables (replacing
them with nearest-neighbour estimates of their conditional mean given the I
variables) and measuring how far the blinded principal components move from
the original ones.
"""

from .baselines import b2, b4
from .blinding import BlindedSample, GaussianModel, blind, blind_population_gaussian
from .errors import ArgumentError, BlindPCAError, ConvergenceError, InvalidDataError, NumericError
from .knn import Metric, NeighborConfig, gcv_select_r, local_estimate, neighbor_sets
from .objective import (
    EmpiricalScorer,
    ObjectiveReport,
    PopulationScorer,
    component_distance,
    evaluate,
    evaluate_population,
    make_weights,
)
from .pca import EigenSystem, covariance, eigendecompose, principal_components
from .search import SearchConfig, SelectionResult, exhaustive, forward_backward, genetic, run_search, select_cardinality
from .simgen import ProportionTable, StudyConfig, example2_true_cov, generate, run_study

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "BlindPCAError",
    "BlindedSample",
    "ConvergenceError",
    "EigenSystem",
    "EmpiricalScorer",
    "GaussianModel",
    "InvalidDataError",
    "Metric",
    "NeighborConfig",
    "NumericError",
    "ObjectiveReport",
    "PopulationScorer",
    "ProportionTable",
    "SearchConfig",
    "SelectionResult",
    "StudyConfig",
    "b2",
    "b4",
    "blind",
    "blind_population_gaussian",
    "component_distance",
    "covariance",
    "eigendecompose",
    "evaluate",
    "evaluate_population",
    "example2_true_cov",
    "exhaustive",
    "forward_backward",
    "gcv_select_r",
    "generate",
    "genetic",
    "local_estimate",
    "make_weights",
    "neighbor_sets",
    "principal_components",
    "run_search",
    "run_study",
    "select_cardinality",
]
