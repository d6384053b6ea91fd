"""Constrained assignment of points to fixed centers.

Points sharing a must-link group move together, so every solver works on a
``G x K`` group-to-center cost matrix. Cannot-links become conflicts between
groups: two conflicting groups may not share a cluster.

``exact_assign`` is a branch-and-bound that proves optimality; ``greedy_assign``
places groups one at a time and may give up feasibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import Dataset, GroupStructure, squared_distances


class InfeasibleAssignmentError(Exception):
    """No assignment satisfies the conflicts and cluster-occupancy requirements."""


@dataclass(frozen=True, eq=False)
class AssignmentProblem:
    """Group-to-center costs plus the constraints an assignment must honour.

    ``groups`` is optional; when given, results also carry the per-point
    membership and the greedy solver uses group sizes for its ordering.
    """

    cost: np.ndarray
    conflicts: frozenset = frozenset()
    require_nonempty: bool = True
    forbidden_cluster: int | None = None
    groups: GroupStructure | None = None

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=np.float64)
        if cost.ndim != 2 or cost.shape[0] < 1 or cost.shape[1] < 1:
            raise ValueError(f"cost must be a non-empty G x K matrix, got shape {cost.shape}")
        if not np.all(np.isfinite(cost)) or cost.min() < 0:
            raise ValueError("costs must be finite and nonnegative")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "conflicts", frozenset(self.conflicts))
        for g, h in self.conflicts:
            if g == h or not (0 <= g < cost.shape[0] and 0 <= h < cost.shape[0]):
                raise ValueError(f"invalid conflict pair ({g}, {h})")
        if self.forbidden_cluster is not None and not 0 <= self.forbidden_cluster < cost.shape[1]:
            raise ValueError(f"forbidden cluster {self.forbidden_cluster} out of range")
        if self.groups is not None and self.groups.n_groups != cost.shape[0]:
            raise ValueError("group structure does not match the cost matrix")

    @classmethod
    def from_centers(
        cls,
        dataset: Dataset,
        centers: np.ndarray,
        groups: GroupStructure,
        require_nonempty: bool = True,
        forbidden_cluster: int | None = None,
    ) -> AssignmentProblem:
        cost = groups.group_costs(squared_distances(dataset.points, np.asarray(centers, dtype=np.float64)))
        return cls(cost, groups.conflicts, require_nonempty, forbidden_cluster, groups)

    @property
    def n_groups(self) -> int:
        return self.cost.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.cost.shape[1]

    def masked_cost(self) -> np.ndarray:
        cost = self.cost.copy()
        if self.forbidden_cluster is not None:
            cost[:, self.forbidden_cluster] = np.inf
        return cost


@dataclass(frozen=True, eq=False)
class AssignmentResult:
    group_assignment: np.ndarray
    membership: np.ndarray | None
    feasible: bool
    objective: float


@dataclass(frozen=True)
class _ConflictGraph:
    neighbours: tuple  # per group, tuple of conflicting groups
    components: tuple  # connected components with at least one conflict, largest first
    free: np.ndarray  # groups without any conflict


@lru_cache(maxsize=64)
def _conflict_graph(conflicts: frozenset, n_groups: int) -> _ConflictGraph:
    adj = [[] for _ in range(n_groups)]
    for g, h in sorted(conflicts):
        adj[g].append(h)
        adj[h].append(g)
    seen = [False] * n_groups
    components = []
    for start in range(n_groups):
        if seen[start] or not adj[start]:
            continue
        comp, stack = [], [start]
        seen[start] = True
        while stack:
            g = stack.pop()
            comp.append(g)
            for h in adj[g]:
                if not seen[h]:
                    seen[h] = True
                    stack.append(h)
        components.append(tuple(sorted(comp)))
    components.sort(key=lambda c: (-len(c), c[0]))
    free = np.array([g for g in range(n_groups) if not adj[g]], dtype=np.int64)
    return _ConflictGraph(tuple(tuple(a) for a in adj), tuple(components), free)


def _result(problem: AssignmentProblem, assignment, feasible: bool) -> AssignmentResult:
    assignment = np.asarray(assignment, dtype=np.int64)
    objective = math.fsum(problem.cost[np.arange(problem.n_groups), assignment])
    membership = problem.groups.expand(assignment) if problem.groups is not None else None
    return AssignmentResult(assignment, membership, feasible, objective)


def _covers(assignment, required) -> bool:
    return not required or set(required) <= set(np.asarray(assignment).tolist())


class _Search:
    """Depth-first branch-and-bound over the groups that carry conflicts."""

    def __init__(self, cost: np.ndarray, graph: _ConflictGraph):
        self.cost = cost
        self.costl = cost.tolist()
        order = np.argsort(cost, axis=1, kind="stable")
        # inf marks the forbidden cluster; it sorts last and is never admissible
        self.orderl = [[k for k in row if math.isfinite(self.costl[g][k])] for g, row in enumerate(order.tolist())]
        self.nbrs = graph.neighbours
        self.components = graph.components
        self.free = graph.free.tolist()
        self.comp_of = [-1] * cost.shape[0]
        for ci, comp in enumerate(graph.components):
            for g in comp:
                self.comp_of[g] = ci
        self.assign = [-1] * cost.shape[0]

    def relaxed(self, comp_assigns) -> np.ndarray:
        """Full assignment from per-component solutions; free groups at their cheapest option."""
        assignment = np.empty(len(self.orderl), dtype=np.int64)
        for comp, values in zip(self.components, comp_assigns):
            assignment[list(comp)] = values
        for g in self.free:
            assignment[g] = self.orderl[g][0]
        return assignment

    def admissible(self, g):
        assign = self.assign
        blocked = {assign[h] for h in self.nbrs[g]}
        return [k for k in self.orderl[g] if k not in blocked]

    def scan(self, comp):
        """Sum of cheapest admissible costs over unassigned groups of ``comp``.

        Returns ``(bound, pick)`` where ``pick`` has the largest regret (-1 once
        all are assigned), or ``None`` if some group has no admissible center.
        """
        assign, costl = self.assign, self.costl
        total = 0.0
        pick, pick_regret = -1, -1.0
        for g in comp:
            if assign[g] >= 0:
                continue
            blocked = {assign[h] for h in self.nbrs[g]}
            first = second = None
            for k in self.orderl[g]:
                if k in blocked:
                    continue
                if first is None:
                    first = k
                else:
                    second = k
                    break
            if first is None:
                return None
            c1 = costl[g][first]
            regret = math.inf if second is None else costl[g][second] - c1
            if regret > pick_regret:
                pick, pick_regret = g, regret
            total += c1
        return total, pick

    def solve_component(self, comp):
        """Minimum-cost conflict-free assignment of one component, ignoring occupancy."""
        best = [math.inf, None]
        assign, costl = self.assign, self.costl

        def dfs(acc):
            scanned = self.scan(comp)
            if scanned is None:
                return
            lb, g = scanned
            if g < 0:
                if acc < best[0]:
                    best[0], best[1] = acc, [assign[h] for h in comp]
                return
            if acc + lb >= best[0]:
                return
            row = costl[g]
            rest = lb - row[self.admissible(g)[0]]
            for k in self.admissible(g):
                child = acc + row[k]
                if child + rest >= best[0]:
                    break
                assign[g] = k
                dfs(child)
                assign[g] = -1

        dfs(0.0)
        if best[1] is None:
            raise InfeasibleAssignmentError("cannot-link conflicts admit no assignment")
        return best[0], best[1]


def exact_assign(problem: AssignmentProblem) -> AssignmentResult:
    """Provably optimal assignment of groups to centers.

    Honours conflicts, keeps the forbidden cluster empty and, when
    ``require_nonempty`` is set, gives every other cluster at least one group.
    Raises :class:`InfeasibleAssignmentError` when no such assignment exists.

    Without the occupancy requirement the problem splits into the connected
    components of the conflict graph, each solved by a regret-ordered
    branch-and-bound; free groups simply take their cheapest center. When
    that relaxed optimum leaves a required cluster empty, an outer search
    branches on which group first occupies it and bounds every node by the
    relaxed optimum under the accumulated restrictions.
    """
    G, K = problem.cost.shape
    allowed = [k for k in range(K) if k != problem.forbidden_cluster]
    if not allowed:
        raise InfeasibleAssignmentError("every cluster is forbidden")
    required = allowed if problem.require_nonempty else []
    if len(required) > G:
        raise InfeasibleAssignmentError(f"{G} groups cannot occupy {len(required)} clusters")

    cost = problem.masked_cost()
    graph = _conflict_graph(problem.conflicts, G)
    search = _Search(cost, graph)
    comp_vals, comp_assigns = [], []
    for comp in graph.components:
        value, values = search.solve_component(comp)
        comp_vals.append(value)
        comp_assigns.append(values)

    assignment = search.relaxed(comp_assigns)
    if _covers(assignment, required):
        return _result(problem, assignment, True)
    return _result(problem, _cover_search(problem, search, comp_vals, comp_assigns, required), True)


def _cover_search(problem, search, comp_vals, comp_assigns, required):
    """Restore cluster occupancy on top of the relaxed optimum.

    At a node some empty required cluster ``k`` is picked. Every feasible
    completion puts some group on ``k``; branch ``i`` fixes the ``i``-th
    candidate group there and bars the earlier candidates from ``k``, so
    the branches partition the feasible set.
    """
    cost = search.cost
    G, K = cost.shape
    comps = search.components
    comp_of = search.comp_of
    orderl, costl = search.orderl, search.costl
    incumbent = [math.inf, None]

    def offer(assignment):
        value = math.fsum(cost[np.arange(G), assignment])
        if value < incumbent[0]:
            incumbent[0], incumbent[1] = value, np.array(assignment, dtype=np.int64)

    greedy, relaxed_flag = _greedy(cost, search.nbrs, _sizes(problem), problem.forbidden_cluster)
    if not relaxed_flag and _covers(greedy, required) and not _violates(greedy, problem.conflicts):
        offer(greedy)

    def explore(value):
        if value >= incumbent[0]:
            return
        assignment = search.relaxed(comp_assigns)
        used = set(assignment.tolist())
        uncovered = [k for k in required if k not in used]
        if not uncovered:
            offer(assignment)
            return
        k = uncovered[0]

        candidates = []
        for g in range(G):
            options = orderl[g]
            if k not in options:
                continue
            ci = comp_of[g]
            if ci < 0:
                candidates.append((value + costl[g][k] - costl[g][options[0]], g))
                continue
            orderl[g] = [k]
            try:
                v, _ = search.solve_component(comps[ci])
            except InfeasibleAssignmentError:
                continue
            finally:
                orderl[g] = options
            candidates.append((value - comp_vals[ci] + v, g))
        candidates.sort()

        barred = []
        for bound, g in candidates:
            if bound >= incumbent[0]:
                break
            options = orderl[g]
            ci = comp_of[g]
            orderl[g] = [k]
            if ci < 0:
                explore(value + costl[g][k] - costl[g][options[0]])
            else:
                try:
                    v, values = search.solve_component(comps[ci])
                except InfeasibleAssignmentError:
                    v = None
                if v is not None:
                    saved = comp_vals[ci], comp_assigns[ci]
                    comp_vals[ci], comp_assigns[ci] = v, values
                    explore(value - saved[0] + v)
                    comp_vals[ci], comp_assigns[ci] = saved
            # k is empty in the relaxed optimum, so barring it leaves that optimum intact
            barred.append((g, options))
            orderl[g] = [x for x in options if x != k]
            if not orderl[g]:
                break
        for g, options in reversed(barred):
            orderl[g] = options

    explore(math.fsum(comp_vals) + math.fsum(costl[g][orderl[g][0]] for g in search.free))
    if incumbent[1] is None:
        raise InfeasibleAssignmentError("no assignment occupies every required cluster")
    return incumbent[1]


def _sizes(problem: AssignmentProblem) -> np.ndarray:
    if problem.groups is not None:
        return problem.groups.sizes
    return np.ones(problem.n_groups, dtype=np.int64)


def _violates(assignment, conflicts) -> bool:
    return any(assignment[g] == assignment[h] for g, h in conflicts)


def _greedy(cost, neighbours, sizes, forbidden, frozen=None):
    """Place groups one by one on their cheapest center not held by a conflicting group.

    ``cost`` must already carry ``inf`` in the forbidden column. With
    ``frozen`` only the groups sitting on ``forbidden`` move; the others keep
    their cluster and count as already placed.
    """
    G, K = cost.shape
    if frozen is None:
        assignment = np.full(G, -1, dtype=np.int64)
        todo = range(G)
    else:
        assignment = np.array(frozen, dtype=np.int64)
        todo = np.flatnonzero(assignment == forbidden).tolist()
        assignment[todo] = -1
    order = sorted(todo, key=lambda g: (-sizes[g], g))
    allowed = [k for k in range(K) if k != forbidden]
    relaxed = False
    for g in order:
        blocked = {int(assignment[h]) for h in neighbours[g]}
        candidates = [k for k in allowed if k not in blocked]
        if not candidates:
            candidates = allowed
            relaxed = True
        row = cost[g]
        assignment[g] = min(candidates, key=lambda k: (row[k], k))
    return assignment, relaxed


def greedy_assign(
    dataset: Dataset,
    centers: np.ndarray,
    groups: GroupStructure,
    forbidden_cluster: int | None = None,
    frozen_membership: np.ndarray | None = None,
) -> AssignmentResult:
    """Heuristic assignment: groups by descending size, each to its cheapest admissible center.

    A center is admissible for a group if no conflicting group already sits
    there. When none is, the group takes the cheapest center regardless and
    the result is flagged infeasible. Never raises on conflicts.

    With ``forbidden_cluster`` and ``frozen_membership`` (the relocation step
    of mutation) only groups currently on the forbidden cluster are moved,
    and never back onto it.
    """
    centers = np.asarray(centers, dtype=np.float64)
    K = centers.shape[0]
    if forbidden_cluster is not None and K < 2:
        raise ValueError("need at least two centers to forbid one")
    problem = AssignmentProblem.from_centers(dataset, centers, groups, False, forbidden_cluster)
    cost = problem.masked_cost()
    frozen = None
    if frozen_membership is not None:
        if forbidden_cluster is None:
            raise ValueError("frozen_membership requires forbidden_cluster")
        frozen_membership = np.asarray(frozen_membership, dtype=np.int64)
        frozen = np.array([frozen_membership[m[0]] for m in groups.groups], dtype=np.int64)
        # a group partly on the removed center is moved as a whole
        for g, m in enumerate(groups.groups):
            if np.any(frozen_membership[m] == forbidden_cluster):
                frozen[g] = forbidden_cluster
    graph = _conflict_graph(groups.conflicts, groups.n_groups)
    assignment, relaxed = _greedy(cost, graph.neighbours, groups.sizes, forbidden_cluster, frozen)
    occupied = [k for k in range(K) if k != forbidden_cluster]
    feasible = not relaxed and not _violates(assignment, groups.conflicts) and _covers(assignment, occupied)
    return _result(problem, assignment, feasible)
