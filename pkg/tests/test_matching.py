import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from oracles import brute_force_permutation
from smdeclust.matching import align_centers, hungarian_match, rectangular_assignment


def test_diagonal_and_antidiagonal():
    perm, total = hungarian_match([[0, 5], [5, 0]])
    assert list(perm) == [0, 1] and total == 0
    perm, total = hungarian_match([[5, 0], [0, 5]])
    assert list(perm) == [1, 0] and total == 0


def test_three_by_three_hand_case():
    cost = [[4, 1, 3], [2, 0, 5], [3, 2, 2]]
    perm, total = hungarian_match(cost)
    # rows 0,1,2 -> columns 1,0,2: 1 + 2 + 2
    assert list(perm) == [1, 0, 2]
    assert total == 5 == brute_force_permutation(cost)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        hungarian_match([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(ValueError):
        hungarian_match([[np.inf, 1], [1, 1]])


def test_rectangular_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n, m = sorted(rng.integers(1, 9, size=2))
        cost = rng.uniform(size=(n, m))
        cols, total = rectangular_assignment(cost)
        r, c = linear_sum_assignment(cost)
        assert len(set(cols)) == n
        assert total == pytest.approx(cost[r, c].sum(), rel=1e-12)


def test_align_swap_and_identity():
    a = np.array([[0.0, 0.0], [9.0, 9.0]])
    np.testing.assert_array_equal(align_centers(a, a[::-1]), a)
    np.testing.assert_array_equal(align_centers(a, a), a)


def test_align_beats_every_permutation():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.normal(size=(2, 4, 2))
        aligned = ((align_centers(a, b) - a) ** 2).sum()
        for p in itertools.permutations(range(4)):
            assert aligned <= ((b[list(p)] - a) ** 2).sum() + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_hungarian_is_optimal_permutation(K, seed):
    cost = np.random.default_rng(seed).integers(0, 20, size=(K, K)).astype(float)
    perm, total = hungarian_match(cost)
    assert sorted(perm) == list(range(K))
    assert total == cost[np.arange(K), perm].sum() == brute_force_permutation(cost)
