"""Memetic differential evolution for semi-supervised MSSC.

Each sweep visits every population member ``S_s``: three other members are
combined by DE crossover on their (aligned) center matrices, the offspring is
optionally mutated by relocating one center, refined by the constrained
K-MEANS local search, and replaces ``S_s`` only if strictly better.

All randomness comes from one ``numpy.random.Generator``, consumed in this
order: initial centers of each member, then per offspring the three parents,
``F``, and (with mutation) the removed center and the roulette draw.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .assign import AssignmentProblem, InfeasibleAssignmentError, exact_assign, greedy_assign
from .localsearch import DEFAULT_MAX_ITERS, ss_kmeans
from .matching import align_centers
from .model import ConstraintSet, Dataset, Solution
from .report import BenchRecord

log = logging.getLogger(__name__)

ASSIGNMENT_MODES = ("exact", "greedy")
STAGNATION_MODES = ("sweep", "replacement")

# solver id -> (mutation, assignment mode used by crossover and mutation)
VARIANTS = {
    "sg-mde": (False, "greedy"),
    "s-mde": (False, "exact"),
    "smg-mde": (True, "greedy"),
    "sm-mde": (True, "exact"),
}


@dataclass
class MdeConfig:
    """Parameters of the memetic search.

    ``stagnation`` selects how the no-improvement counter advances: ``"replacement"``
    counts only replacements that did not beat the incumbent; ``"sweep"``
    (default) also counts a full sweep in which no member was replaced.
    """

    pop_size: int = 20
    n_max: int = 500
    delta: float = 1e-4
    f_range: tuple[float, float] = (0.5, 0.8)
    alpha: float = 0.5
    mutation: bool = False
    assignment: str = "greedy"
    max_iterations: int | None = None
    ls_max_iters: int = DEFAULT_MAX_ITERS
    seed: int | None = None
    stagnation: str = "sweep"

    def __post_init__(self):
        if self.pop_size < 4:
            raise ValueError("crossover needs a population of at least 4")
        lo, hi = self.f_range
        if not 0 < lo <= hi < 2:
            raise ValueError(f"F range must lie inside (0, 2), got {self.f_range}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if self.assignment not in ASSIGNMENT_MODES:
            raise ValueError(f"assignment must be one of {ASSIGNMENT_MODES}")
        if self.stagnation not in STAGNATION_MODES:
            raise ValueError(f"stagnation must be one of {STAGNATION_MODES}")
        if self.n_max < 1 or self.ls_max_iters < 1:
            raise ValueError("n_max and ls_max_iters must be positive")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")

    @classmethod
    def for_variant(cls, name: str, **kwargs) -> MdeConfig:
        mutation, assignment = VARIANTS[name]
        return cls(mutation=mutation, assignment=assignment, **kwargs)


@dataclass
class LocalSearchStats:
    calls: int = 0
    iterations: int = 0


@dataclass
class Population:
    members: list[Solution]
    best: Solution
    stagnation: int = 0

    @classmethod
    def from_members(cls, members: list[Solution]) -> Population:
        best = min(members, key=lambda s: s.objective)
        return cls(list(members), best)

    def spread(self) -> float:
        """Sum of absolute objective differences over all member pairs."""
        f = np.sort([m.objective for m in self.members])
        weights = 2 * np.arange(len(f)) - len(f) + 1
        return float(np.dot(weights, f))


@dataclass
class MdeResult:
    best: Solution
    record: BenchRecord
    population: Population
    sweeps: int
    stop_reason: str
    incumbent_history: list[float] = field(default_factory=list)


def _refine(dataset, constraints, centers, config, stats):
    report = ss_kmeans(dataset, constraints, centers, config.ls_max_iters)
    stats.calls += 1
    stats.iterations += report.iterations
    return report.solution


def initialize_population(
    dataset: Dataset,
    constraints: ConstraintSet,
    n_clusters: int,
    config: MdeConfig,
    rng: np.random.Generator | None = None,
    stats: LocalSearchStats | None = None,
) -> Population:
    """``pop_size`` constrained K-MEANS runs, each started from distinct random points."""
    if n_clusters > dataset.n_points:
        raise ValueError(f"cannot form {n_clusters} clusters from {dataset.n_points} points")
    rng = np.random.default_rng(config.seed) if rng is None else rng
    stats = LocalSearchStats() if stats is None else stats
    constraints.groups  # reject contradictory links before any work
    members = []
    for _ in range(config.pop_size):
        idx = rng.choice(dataset.n_points, size=n_clusters, replace=False)
        members.append(_refine(dataset, constraints, dataset.points[idx], config, stats))
    return Population.from_members(members)


def pick_parents(rng: np.random.Generator, pop_size: int, s: int) -> np.ndarray:
    others = np.array([i for i in range(pop_size) if i != s])
    return rng.choice(others, size=3, replace=False)


def _assign(dataset, constraints, centers, mode) -> Solution:
    groups = constraints.groups
    if mode == "greedy":
        res = greedy_assign(dataset, centers, groups)
    else:
        res = exact_assign(AssignmentProblem.from_centers(dataset, centers, groups, require_nonempty=True))
    return Solution(res.membership, centers, res.objective, res.feasible)


def crossover(
    population: Population,
    s: int,
    F: float,
    dataset: Dataset,
    constraints: ConstraintSet,
    assignment: str = "greedy",
    parents=None,
    rng: np.random.Generator | None = None,
) -> Solution:
    """DE offspring ``psi1 + F * (psi2 - psi3)`` with both difference terms aligned to ``psi1``.

    ``parents`` are three member indices other than ``s``; if omitted they are
    drawn from ``rng``. The offspring membership comes from the given
    assignment mode, so a greedy offspring may be infeasible.
    """
    if len(population.members) < 4:
        raise ValueError("crossover needs a population of at least 4")
    if parents is None:
        parents = pick_parents(rng, len(population.members), s)
    a, b, c = (population.members[i].centers for i in parents)
    centers = a + F * (align_centers(a, b) - align_centers(a, c))
    return _assign(dataset, constraints, centers, assignment)


def selection_probabilities(distances, alpha: float) -> np.ndarray:
    """Mix of a uniform pick and a pick proportional to distance, weighted by ``alpha``."""
    distances = np.asarray(distances, dtype=np.float64)
    n = distances.shape[0]
    total = distances.sum()
    if alpha == 0 or total == 0:
        return np.full(n, 1.0 / n)
    return (1 - alpha) / n + alpha * distances / total


def roulette(probabilities, rng: np.random.Generator) -> int:
    """Index drawn by inverting the cumulative sum with one uniform number."""
    cumulative = np.cumsum(probabilities)
    u = rng.random() * cumulative[-1]
    return int(min(np.searchsorted(cumulative, u, side="right"), len(cumulative) - 1))


def relocation_probabilities(
    offspring: Solution,
    dataset: Dataset,
    constraints: ConstraintSet,
    removed: int,
    alpha: float = 0.5,
    assignment: str = "greedy",
) -> np.ndarray:
    """Roulette weights over data points for replacing center ``removed``.

    Points are reassigned without the removed center; each point's weight
    mixes a uniform share with its distance to the center it now belongs to.
    If the exact reassignment is infeasible, or every distance is zero, the
    weights fall back to uniform.
    """
    K = offspring.n_clusters
    if K < 2:
        raise ValueError("mutation needs at least two clusters")
    centers = offspring.centers
    groups = constraints.groups
    if assignment == "exact":
        problem = AssignmentProblem.from_centers(dataset, centers, groups, True, forbidden_cluster=removed)
        try:
            membership = exact_assign(problem).membership
        except InfeasibleAssignmentError:
            return selection_probabilities(np.zeros(dataset.n_points), 0.0)
    else:
        membership = greedy_assign(dataset, centers, groups, removed, offspring.membership).membership
    distances = np.linalg.norm(dataset.points - centers[membership], axis=1)
    return selection_probabilities(distances, alpha)


def mutate(
    offspring: Solution,
    dataset: Dataset,
    constraints: ConstraintSet,
    rng: np.random.Generator,
    alpha: float = 0.5,
    assignment: str = "greedy",
) -> Solution:
    """Relocate one random center onto a data point picked by roulette wheel.

    Points far from their nearest remaining center are favoured according to
    ``alpha`` (see :func:`relocation_probabilities`).
    """
    K = offspring.n_clusters
    if K < 2:
        raise ValueError("mutation needs at least two clusters")
    removed = int(rng.integers(K))
    probs = relocation_probabilities(offspring, dataset, constraints, removed, alpha, assignment)
    chosen = roulette(probs, rng)
    new_centers = offspring.centers.copy()
    new_centers[removed] = dataset.points[chosen]
    return _assign(dataset, constraints, new_centers, assignment)


def run(dataset: Dataset, constraints: ConstraintSet, n_clusters: int, config: MdeConfig | None = None) -> MdeResult:
    """Run the memetic search and return the incumbent with its run metrics."""
    config = MdeConfig() if config is None else config
    rng = np.random.default_rng(config.seed)
    stats = LocalSearchStats()
    start = time.perf_counter()

    pop = initialize_population(dataset, constraints, n_clusters, config, rng, stats)
    history = [pop.best.objective]
    sweeps = 0
    while True:
        if pop.stagnation >= config.n_max:
            reason = "stagnation"
            break
        if pop.spread() <= config.delta:
            reason = "collapse"
            break
        if config.max_iterations is not None and sweeps >= config.max_iterations:
            reason = "max-iterations"
            break
        replaced = False
        for s in range(config.pop_size):
            parents = pick_parents(rng, config.pop_size, s)
            F = rng.uniform(*config.f_range)
            child = crossover(pop, s, F, dataset, constraints, config.assignment, parents)
            if config.mutation:
                child = mutate(child, dataset, constraints, rng, config.alpha, config.assignment)
            child = _refine(dataset, constraints, child.centers, config, stats)
            if child.objective < pop.members[s].objective:
                pop.members[s] = child
                replaced = True
                if child.objective < pop.best.objective:
                    pop.best = child
                    pop.stagnation = 0
                else:
                    pop.stagnation += 1
        sweeps += 1
        if config.stagnation == "sweep" and not replaced:
            pop.stagnation += 1
        history.append(pop.best.objective)
        log.debug("sweep %d best %.6f stagnation %d", sweeps, pop.best.objective, pop.stagnation)

    elapsed = time.perf_counter() - start
    record = BenchRecord(
        mssc_of=pop.best.objective,
        wall_time_s=elapsed,
        n_ls_calls=stats.calls,
        n_ls_iters=stats.iterations,
        feasible=pop.best.feasible,
        seed=config.seed,
    )
    return MdeResult(pop.best, record, pop, sweeps, reason, history)
