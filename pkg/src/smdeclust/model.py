"""Core data model: datasets, link constraints, must-link groups and solutions.

All indices are 0-based inside the library. Files on disk use 1-based point
indices (see :mod:`smdeclust.io`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np
from scipy.spatial.distance import cdist


class InfeasibleInstanceError(ValueError):
    """The link constraints admit no feasible clustering."""


class EmptyClusterError(ValueError):
    """A cluster received no points."""

    def __init__(self, cluster: int):
        super().__init__(f"cluster {cluster} is empty")
        self.cluster = cluster


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError(f"points must be an N x d array with N, d >= 1, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("points contain NaN or Inf")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (points.shape[0],):
                raise ValueError("labels must have one entry per point")
            labels = labels.astype(np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n_points


def _canonical_pairs(pairs: Iterable[tuple[int, int]], n_points: int, kind: str) -> frozenset:
    out = set()
    for i, j in pairs:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"{kind} pair ({i}, {j}) links a point to itself")
        if not (0 <= i < n_points and 0 <= j < n_points):
            raise ValueError(f"{kind} pair ({i}, {j}) out of range for {n_points} points")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Must-link and cannot-link pairs over ``n_points`` points.

    Pairs are stored canonically as ``(i, j)`` with ``i < j``.
    """

    n_points: int
    must_links: frozenset = field(default_factory=frozenset)
    cannot_links: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "must_links", _canonical_pairs(self.must_links, self.n_points, "must-link"))
        object.__setattr__(self, "cannot_links", _canonical_pairs(self.cannot_links, self.n_points, "cannot-link"))

    @classmethod
    def empty(cls, n_points: int) -> ConstraintSet:
        return cls(n_points)

    def __eq__(self, other):
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return (self.n_points, self.must_links, self.cannot_links) == (
            other.n_points,
            other.must_links,
            other.cannot_links,
        )

    def __hash__(self):
        return hash((self.n_points, self.must_links, self.cannot_links))

    @cached_property
    def ml_array(self) -> np.ndarray:
        return np.array(sorted(self.must_links), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def cl_array(self) -> np.ndarray:
        return np.array(sorted(self.cannot_links), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def groups(self) -> GroupStructure:
        """Group structure, computed once (raises if the links contradict)."""
        return build_groups(self)


@dataclass(frozen=True, eq=False)
class GroupStructure:
    """Connected components of the must-link graph and their conflict graph.

    ``groups[g]`` holds the sorted member indices of group ``g``; groups are
    ordered by their smallest member. ``conflicts`` holds group pairs
    ``(g, h)`` with ``g < h``.
    """

    groups: tuple
    conflicts: frozenset
    group_of: np.ndarray

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_points(self) -> int:
        return self.group_of.shape[0]

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups], dtype=np.int64)

    @cached_property
    def _reduce_index(self) -> tuple[np.ndarray, np.ndarray]:
        perm = np.concatenate(self.groups)
        starts = np.concatenate(([0], np.cumsum(self.sizes)[:-1]))
        return perm, starts

    @cached_property
    def neighbours(self) -> tuple:
        adj = [[] for _ in range(self.n_groups)]
        for g, h in sorted(self.conflicts):
            adj[g].append(h)
            adj[h].append(g)
        return tuple(tuple(a) for a in adj)

    def group_costs(self, point_costs: np.ndarray) -> np.ndarray:
        """Sum an ``N x K`` per-point cost matrix into a ``G x K`` per-group one."""
        perm, starts = self._reduce_index
        return np.add.reduceat(point_costs[perm], starts, axis=0)

    def expand(self, group_assignment: np.ndarray) -> np.ndarray:
        """Per-point membership from a per-group assignment."""
        return np.asarray(group_assignment, dtype=np.int64)[self.group_of]


def build_groups(constraints: ConstraintSet, n_points: int | None = None) -> GroupStructure:
    """Collapse must-link components into groups and lift cannot-links to them.

    Raises :class:`InfeasibleInstanceError` if a cannot-link joins two points
    of the same group.
    """
    n = constraints.n_points if n_points is None else n_points
    if n != constraints.n_points:
        raise ValueError(f"constraint set covers {constraints.n_points} points, not {n}")

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in constraints.must_links:
        ri, rj = find(i), find(j)
        if ri != rj:
            # smallest index as root keeps the result independent of pair order
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj

    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    uniq, group_of = np.unique(roots, return_inverse=True)
    group_of = group_of.astype(np.int64)
    members = [[] for _ in range(len(uniq))]
    for i, g in enumerate(group_of):
        members[g].append(i)
    groups = tuple(np.array(m, dtype=np.int64) for m in members)

    conflicts = set()
    for i, j in constraints.cannot_links:
        g, h = int(group_of[i]), int(group_of[j])
        if g == h:
            raise InfeasibleInstanceError(
                f"cannot-link ({i}, {j}) joins two points that are must-linked together"
            )
        conflicts.add((min(g, h), max(g, h)))
    group_of.setflags(write=False)
    return GroupStructure(groups=groups, conflicts=frozenset(conflicts), group_of=group_of)


def squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """``N x K`` matrix of squared Euclidean distances."""
    return cdist(points, centers, "sqeuclidean")


def _check_centers(dataset: Dataset, centers: np.ndarray) -> np.ndarray:
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != dataset.dim:
        raise ValueError(
            f"centers must be a K x {dataset.dim} matrix, got shape {centers.shape}"
        )
    return centers


def evaluate_objective(dataset: Dataset, membership: np.ndarray, centers: np.ndarray) -> float:
    """Sum of squared distances from each point to the center of its cluster."""
    centers = _check_centers(dataset, centers)
    membership = np.asarray(membership, dtype=np.int64)
    if membership.shape != (dataset.n_points,):
        raise ValueError("membership must have one entry per point")
    if membership.min() < 0 or membership.max() >= centers.shape[0]:
        raise ValueError("membership refers to a cluster without a center")
    diff = dataset.points - centers[membership]
    return float(np.einsum("ij,ij->", diff, diff))


def centroids_from_membership(dataset: Dataset, membership: np.ndarray, n_clusters: int) -> np.ndarray:
    """Arithmetic mean of each cluster; raises :class:`EmptyClusterError` on an empty one."""
    membership = np.asarray(membership, dtype=np.int64)
    counts = np.bincount(membership, minlength=n_clusters)
    if counts.shape[0] > n_clusters:
        raise ValueError("membership refers to clusters beyond n_clusters")
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyClusterError(int(empty[0]))
    sums = np.zeros((n_clusters, dataset.dim))
    np.add.at(sums, membership, dataset.points)
    return sums / counts[:, None]


class Violation(NamedTuple):
    kind: str  # "must-link", "cannot-link" or "empty-cluster"
    i: int
    j: int | None = None

    def __str__(self):
        if self.kind == "empty-cluster":
            return f"empty cluster {self.i}"
        return f"{self.kind} ({self.i}, {self.j})"


def check_feasibility(solution, constraints: ConstraintSet, n_clusters: int) -> tuple[bool, list[Violation]]:
    """Check links and cluster non-emptiness.

    ``solution`` may be a :class:`Solution` or a bare membership vector.
    """
    membership = solution.membership if isinstance(solution, Solution) else np.asarray(solution)
    violations = []
    ml, cl = constraints.ml_array, constraints.cl_array
    if len(ml):
        bad = membership[ml[:, 0]] != membership[ml[:, 1]]
        violations += [Violation("must-link", int(i), int(j)) for i, j in ml[bad]]
    if len(cl):
        bad = membership[cl[:, 0]] == membership[cl[:, 1]]
        violations += [Violation("cannot-link", int(i), int(j)) for i, j in cl[bad]]
    counts = np.bincount(membership, minlength=n_clusters)
    violations += [Violation("empty-cluster", int(k)) for k in np.flatnonzero(counts[:n_clusters] == 0)]
    return not violations, violations


@dataclass(frozen=True, eq=False)
class Solution:
    """A clustering: membership vector, center matrix, objective and feasibility.

    Instances are immutable; build a new one instead of editing arrays.
    """

    membership: np.ndarray
    centers: np.ndarray
    objective: float
    feasible: bool

    def __post_init__(self):
        membership = np.array(self.membership, dtype=np.int64)
        centers = np.array(self.centers, dtype=np.float64)
        membership.setflags(write=False)
        centers.setflags(write=False)
        object.__setattr__(self, "membership", membership)
        object.__setattr__(self, "centers", centers)

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]

    @classmethod
    def build(cls, dataset: Dataset, membership, centers, constraints: ConstraintSet) -> Solution:
        """Evaluate objective and feasibility from scratch."""
        centers = _check_centers(dataset, centers)
        objective = evaluate_objective(dataset, membership, centers)
        feasible, _ = check_feasibility(np.asarray(membership), constraints, centers.shape[0])
        return cls(membership, centers, objective, feasible)

    @classmethod
    def from_membership(cls, dataset: Dataset, membership, n_clusters: int, constraints: ConstraintSet) -> Solution:
        """Solution whose centers are the centroids of ``membership``."""
        centers = centroids_from_membership(dataset, membership, n_clusters)
        return cls.build(dataset, membership, centers, constraints)
