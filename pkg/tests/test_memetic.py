from pathlib import Path

import numpy as np
import pytest

from oracles import brute_force_mssc, random_instance
from smdeclust import io
from smdeclust.bench.baselines import multistart
from smdeclust.bench.generate import generate_constraints
from smdeclust.memetic import (
    VARIANTS,
    MdeConfig,
    Population,
    crossover,
    initialize_population,
    mutate,
    pick_parents,
    relocation_probabilities,
    roulette,
    run,
    selection_probabilities,
)
from smdeclust.model import ConstraintSet, Dataset, InfeasibleInstanceError, Solution, check_feasibility

DATA = Path(__file__).parent / "data"


def _member(dataset, centers):
    centers = np.asarray(centers, dtype=float)
    membership = np.arange(dataset.n_points) % centers.shape[0]
    return Solution.build(dataset, membership, centers, ConstraintSet.empty(dataset.n_points))


def test_config_validation():
    with pytest.raises(ValueError):
        MdeConfig(pop_size=3)
    with pytest.raises(ValueError):
        MdeConfig(f_range=(0.8, 0.5))
    with pytest.raises(ValueError):
        MdeConfig(alpha=1.5)
    with pytest.raises(ValueError):
        MdeConfig(assignment="fast")
    cfg = MdeConfig.for_variant("sm-mde", seed=3)
    assert (cfg.mutation, cfg.assignment, cfg.seed) == (True, "exact", 3)
    assert set(VARIANTS) == {"sg-mde", "s-mde", "smg-mde", "sm-mde"}


@pytest.mark.parametrize(
    "alpha, distances, expected",
    [
        (1.0, [1, 3], [0.25, 0.75]),
        (0.5, [1, 3], [0.375, 0.625]),
        (0.0, [1, 3], [0.5, 0.5]),
        (0.7, [0, 0, 0], [1 / 3, 1 / 3, 1 / 3]),
    ],
)
def test_selection_probabilities(alpha, distances, expected):
    np.testing.assert_allclose(selection_probabilities(distances, alpha), expected, rtol=0, atol=1e-15)


def test_roulette_inverts_cumulative_sum():
    class Fixed:
        def __init__(self, u):
            self.u = u

        def random(self):
            return self.u

    probs = np.array([0.2, 0.3, 0.5])
    assert [roulette(probs, Fixed(u)) for u in (0.0, 0.19, 0.2, 0.49, 0.5, 0.999)] == [0, 0, 1, 1, 2, 2]


def test_pick_parents_excludes_target():
    rng = np.random.default_rng(0)
    for s in range(6):
        parents = pick_parents(rng, 6, s)
        assert len(set(parents)) == 3 and s not in parents


def test_crossover_substitution():
    ds = Dataset([[0.0], [1.0], [2.0]])
    pop = Population.from_members([_member(ds, [[c]]) for c in (0.0, 2.0, 1.0, 5.0)])
    child = crossover(pop, 3, 0.5, ds, ConstraintSet.empty(3), parents=[0, 1, 2])
    np.testing.assert_array_equal(child.centers, [[0.5]])
    assert child.objective == 0.25 + 0.25 + 2.25


def test_crossover_aligns_before_subtracting():
    ds = Dataset(np.zeros((4, 2)))
    a = [[0.0, 0.0], [10.0, 0.0]]
    b = [[11.0, 0.0], [1.0, 0.0]]  # a shifted by one, rows swapped
    c = [[0.0, 0.0], [10.0, 0.0]]
    pop = Population.from_members([_member(ds, m) for m in (a, b, c, a)])
    child = crossover(pop, 3, 0.5, ds, ConstraintSet.empty(4), parents=[0, 1, 2])
    np.testing.assert_array_equal(child.centers, [[0.5, 0.0], [10.5, 0.0]])


def test_crossover_exact_mode_is_feasible():
    rng = np.random.default_rng(1)
    ds, cs = random_instance(rng, 40, 3, 8, 12)
    cfg = MdeConfig(pop_size=5, seed=1)
    pop = initialize_population(ds, cs, 3, cfg)
    child = crossover(pop, 0, 0.6, ds, cs, "exact", rng=rng)
    assert child.feasible == check_feasibility(child, cs, 3)[0] is True


def test_relocation_probabilities_fall_back_to_uniform():
    # with one center removed only one cluster remains, which the cannot-link forbids
    ds = Dataset([[0.0], [1.0], [5.0]])
    cs = ConstraintSet(3, [], [(0, 1)])
    offspring = Solution.build(ds, [0, 1, 1], [[0.0], [3.0]], cs)
    probs = relocation_probabilities(offspring, ds, cs, removed=1, alpha=1.0, assignment="exact")
    np.testing.assert_array_equal(probs, np.full(3, 1 / 3))


def test_relocation_probabilities_greedy_keeps_untouched_groups():
    ds = Dataset([[0.0], [1.0], [9.0], [10.0]])
    cs = ConstraintSet.empty(4)
    offspring = Solution.build(ds, [0, 0, 1, 1], [[0.0], [10.0]], cs)
    probs = relocation_probabilities(offspring, ds, cs, removed=1, alpha=1.0, assignment="greedy")
    # points 2 and 3 move to the center at 0; distances 0, 1, 9, 10
    np.testing.assert_allclose(probs, [0.0, 0.05, 0.45, 0.5], rtol=0, atol=1e-15)


def test_mutate_moves_one_center_to_a_data_point():
    rng = np.random.default_rng(3)
    ds, cs = random_instance(rng, 30, 3, 5, 5)
    offspring = _member(ds, ds.points[:3] + 0.5)
    for mode in ("greedy", "exact"):
        child = mutate(offspring, ds, cs, np.random.default_rng(5), 0.5, mode)
        changed = np.flatnonzero(np.any(child.centers != offspring.centers, axis=1))
        assert len(changed) == 1
        assert any(np.array_equal(child.centers[changed[0]], p) for p in ds.points)


def test_population_is_reproducible_and_feasible():
    rng = np.random.default_rng(2)
    ds, cs = random_instance(rng, 50, 3, 10, 10)
    cfg = MdeConfig(pop_size=4, seed=11)
    one = initialize_population(ds, cs, 3, cfg)
    two = initialize_population(ds, cs, 3, cfg)
    assert len(one.members) == 4
    assert all(m.feasible for m in one.members)
    assert one.best.objective == min(m.objective for m in one.members)
    for a, b in zip(one.members, two.members):
        np.testing.assert_array_equal(a.centers, b.centers)


def test_spread_is_sum_of_pairwise_gaps():
    members = [Solution(np.zeros(1), np.zeros((1, 1)), f, True) for f in (3.0, 1.0, 6.0)]
    assert Population.from_members(members).spread() == 2 + 3 + 5


def test_run_unconstrained_six_points_is_optimal():
    ds = Dataset([[0, 0], [0, 1], [1, 0], [8, 8], [8, 9], [9, 8]])
    result = run(ds, ConstraintSet.empty(6), 2, MdeConfig(pop_size=6, seed=0))
    assert result.best.objective == pytest.approx(brute_force_mssc(ds.points, 2), rel=1e-12)
    assert result.best.objective == pytest.approx(8 / 3, rel=1e-12)


@pytest.mark.parametrize("variant", sorted(VARIANTS))
def test_every_variant_returns_feasible_best(variant):
    rng = np.random.default_rng(4)
    ds, cs = random_instance(rng, 60, 4, 10, 15, spread=3.0)
    result = run(ds, cs, 4, MdeConfig.for_variant(variant, pop_size=6, max_iterations=5, seed=2))
    assert result.best.feasible
    assert check_feasibility(result.best, cs, 4)[0]
    assert result.record.n_ls_calls == 6 + 6 * result.sweeps
    assert result.incumbent_history == sorted(result.incumbent_history, reverse=True)


def test_run_stops_on_iteration_cap_and_stagnation():
    rng = np.random.default_rng(5)
    ds, cs = random_instance(rng, 80, 5, 10, 10, spread=1.0)
    capped = run(ds, cs, 5, MdeConfig(pop_size=5, max_iterations=2, seed=0))
    assert capped.sweeps <= 2
    stalled = run(ds, cs, 5, MdeConfig(pop_size=5, n_max=1, seed=0))
    assert stalled.stop_reason in ("stagnation", "collapse")


def test_run_is_deterministic_for_a_seed():
    rng = np.random.default_rng(6)
    ds, cs = random_instance(rng, 60, 3, 8, 8)
    cfg = MdeConfig(pop_size=5, max_iterations=4, mutation=True, seed=9)
    a, b = run(ds, cs, 3, cfg), run(ds, cs, 3, cfg)
    assert a.best.objective == b.best.objective
    assert a.record.n_ls_iters == b.record.n_ls_iters
    np.testing.assert_array_equal(a.best.membership, b.best.membership)


def test_iris_with_fifty_fifty_constraints():
    ds = io.load_dataset(DATA / "iris.csv", label_column=True)
    cs = generate_constraints(ds.labels, 50, 50, seed=0)
    result = run(ds, cs, 3, MdeConfig(pop_size=10, max_iterations=10, seed=0))
    _, baseline = multistart("blp-km", ds, cs, 3, restarts=100, seed=0)
    assert result.best.feasible
    assert result.best.objective <= baseline.mssc_of * (1 + 1e-9)


def test_replacement_stagnation_never_stops_earlier_than_sweep():
    rng = np.random.default_rng(7)
    ds, cs = random_instance(rng, 60, 4, 6, 6, spread=1.0)
    sweep = run(ds, cs, 4, MdeConfig(pop_size=5, n_max=2, max_iterations=30, seed=3))
    replacement = run(ds, cs, 4, MdeConfig(pop_size=5, n_max=2, max_iterations=30, seed=3, stagnation="replacement"))
    assert replacement.sweeps >= sweep.sweeps
    with pytest.raises(ValueError):
        MdeConfig(stagnation="never")


def test_run_rejects_infeasible_instance():
    ds = Dataset([[0.0], [1.0], [2.0], [3.0]])
    with pytest.raises(InfeasibleInstanceError):
        run(ds, ConstraintSet(4, [], [(0, 1), (0, 2), (1, 2)]), 2, MdeConfig(pop_size=4, seed=0))
    with pytest.raises(InfeasibleInstanceError):
        run(ds, ConstraintSet(4, [(0, 1)], [(0, 1)]), 2, MdeConfig(pop_size=4, seed=0))
