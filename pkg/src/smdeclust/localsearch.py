"""K-MEANS style local searches: constrained (exact assignment), COP-K-MEANS and plain Lloyd."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assign import AssignmentProblem, InfeasibleAssignmentError, exact_assign
from .model import (
    ConstraintSet,
    Dataset,
    InfeasibleInstanceError,
    Solution,
    centroids_from_membership,
    squared_distances,
)

DEFAULT_MAX_ITERS = 25
CENTER_TOL = 1e-12


class CopKMeansFailure(Exception):
    """COP-K-MEANS met a point with no admissible cluster."""

    def __init__(self, point: int, iterations: int):
        super().__init__(f"no admissible cluster for point {point} (iteration {iterations})")
        self.point = point
        self.iterations = iterations


@dataclass
class LocalSearchReport:
    solution: Solution
    iterations: int
    converged: bool
    objectives: list[float] = field(default_factory=list)


def _start(dataset: Dataset, initial_centers, max_iters: int) -> np.ndarray:
    if max_iters < 1:
        raise ValueError(f"max_iters must be at least 1, got {max_iters}")
    centers = np.array(initial_centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != dataset.dim or centers.shape[0] < 1:
        raise ValueError(f"initial centers must be a K x {dataset.dim} matrix")
    return centers


def _unchanged(old: np.ndarray, new: np.ndarray) -> bool:
    return bool(np.all(np.abs(new - old) <= CENTER_TOL))


def ss_kmeans(
    dataset: Dataset,
    constraints: ConstraintSet,
    initial_centers,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> LocalSearchReport:
    """K-MEANS whose assignment step solves the constrained assignment exactly.

    Every iterate is feasible, so the objective never increases. Stops once
    the centers move by at most ``CENTER_TOL`` per coordinate, or after
    ``max_iters`` assignment/update rounds.
    """
    centers = _start(dataset, initial_centers, max_iters)
    groups = constraints.groups
    K = centers.shape[0]
    objectives = []
    converged = False
    for _ in range(max_iters):
        problem = AssignmentProblem.from_centers(dataset, centers, groups, require_nonempty=True)
        try:
            membership = exact_assign(problem).membership
        except InfeasibleAssignmentError as exc:
            raise InfeasibleInstanceError(f"no feasible clustering into {K} clusters: {exc}") from exc
        new_centers = centroids_from_membership(dataset, membership, K)
        solution = Solution.build(dataset, membership, new_centers, constraints)
        objectives.append(solution.objective)
        converged = _unchanged(centers, new_centers)
        centers = new_centers
        if converged:
            break
    return LocalSearchReport(solution, len(objectives), converged, objectives)


def _cop_assign(D: np.ndarray, constraints: ConstraintSet, iteration: int) -> np.ndarray:
    groups = constraints.groups
    group_of = groups.group_of
    nbrs = groups.neighbours
    group_cluster = [-1] * groups.n_groups
    membership = np.empty(D.shape[0], dtype=np.int64)
    order = np.argsort(D, axis=1, kind="stable")
    for i in range(D.shape[0]):
        g = group_of[i]
        for k in order[i]:
            if group_cluster[g] not in (-1, k):
                continue
            if any(group_cluster[h] == k for h in nbrs[g]):
                continue
            group_cluster[g] = int(k)
            membership[i] = k
            break
        else:
            raise CopKMeansFailure(i, iteration)
    return membership


def cop_kmeans(
    dataset: Dataset,
    constraints: ConstraintSet,
    initial_centers,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> LocalSearchReport:
    """COP-K-MEANS: points in dataset order go to the nearest center that breaks no link.

    Links are checked against points placed earlier in the same pass (with
    must-link closure). No backtracking: if a point has no admissible center
    the run raises :class:`CopKMeansFailure`. A cluster left empty keeps its
    previous center; such a result is reported as infeasible.
    """
    centers = _start(dataset, initial_centers, max_iters)
    try:
        constraints.groups
    except InfeasibleInstanceError as exc:
        raise CopKMeansFailure(-1, 1) from exc
    K = centers.shape[0]
    objectives = []
    converged = False
    for it in range(1, max_iters + 1):
        membership = _cop_assign(squared_distances(dataset.points, centers), constraints, it)
        counts = np.bincount(membership, minlength=K)
        new_centers = centers.copy()
        sums = np.zeros_like(centers)
        np.add.at(sums, membership, dataset.points)
        filled = counts > 0
        new_centers[filled] = sums[filled] / counts[filled, None]
        solution = Solution.build(dataset, membership, new_centers, constraints)
        objectives.append(solution.objective)
        converged = _unchanged(centers, new_centers)
        centers = new_centers
        if converged:
            break
    return LocalSearchReport(solution, len(objectives), converged, objectives)


def _reseed_empty(dataset: Dataset, membership: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Move each empty cluster's center onto the point farthest from its own center."""
    K = centers.shape[0]
    membership = membership.copy()
    counts = np.bincount(membership, minlength=K)
    dist = np.einsum("ij,ij->i", dataset.points - centers[membership], dataset.points - centers[membership])
    for k in np.flatnonzero(counts == 0):
        # donors must keep at least one point
        candidates = np.flatnonzero(counts[membership] > 1)
        if candidates.size == 0:
            break
        i = candidates[np.argmax(dist[candidates])]
        counts[membership[i]] -= 1
        counts[k] += 1
        membership[i] = k
        centers[k] = dataset.points[i]
        dist[i] = 0.0
    return membership


def kmeans_unconstrained(dataset: Dataset, initial_centers, max_iters: int = DEFAULT_MAX_ITERS) -> LocalSearchReport:
    """Lloyd's algorithm; empty clusters are re-seeded at the farthest point."""
    centers = _start(dataset, initial_centers, max_iters)
    K = centers.shape[0]
    if K > dataset.n_points:
        raise ValueError(f"cannot form {K} clusters from {dataset.n_points} points")
    no_links = ConstraintSet.empty(dataset.n_points)
    objectives = []
    converged = False
    for _ in range(max_iters):
        membership = np.argmin(squared_distances(dataset.points, centers), axis=1)
        membership = _reseed_empty(dataset, membership, centers)
        new_centers = centroids_from_membership(dataset, membership, K)
        solution = Solution.build(dataset, membership, new_centers, no_links)
        objectives.append(solution.objective)
        converged = _unchanged(centers, new_centers)
        centers = new_centers
        if converged:
            break
    return LocalSearchReport(solution, len(objectives), converged, objectives)
