"""Memetic differential evolution for minimum sum-of-squares clustering with must-link and cannot-link constraints."""

from .assign import AssignmentProblem, AssignmentResult, InfeasibleAssignmentError, exact_assign, greedy_assign
from .localsearch import CopKMeansFailure, cop_kmeans, ss_kmeans
from .matching import align_centers, hungarian_match
from .memetic import MdeConfig, MdeResult, crossover, mutate, run
from .model import (
    ConstraintSet,
    Dataset,
    InfeasibleInstanceError,
    Solution,
    build_groups,
    check_feasibility,
    evaluate_objective,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentProblem",
    "AssignmentResult",
    "ConstraintSet",
    "CopKMeansFailure",
    "Dataset",
    "InfeasibleAssignmentError",
    "InfeasibleInstanceError",
    "MdeConfig",
    "MdeResult",
    "Solution",
    "align_centers",
    "build_groups",
    "check_feasibility",
    "cop_kmeans",
    "crossover",
    "evaluate_objective",
    "exact_assign",
    "greedy_assign",
    "hungarian_match",
    "mutate",
    "run",
    "ss_kmeans",
]
