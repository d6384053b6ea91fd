"""Exhaustive reference solvers and random instance builders used by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np

from smdeclust.model import ConstraintSet, Dataset


def enumerate_assignment(cost, conflicts, require_nonempty=True, forbidden=None):
    """Optimal value over all K^G group assignments, or ``None`` if none is admissible."""
    cost = np.asarray(cost, dtype=float)
    G, K = cost.shape
    allowed = [k for k in range(K) if k != forbidden]
    best = None
    for combo in itertools.product(allowed, repeat=G):
        if any(combo[g] == combo[h] for g, h in conflicts):
            continue
        if require_nonempty and len(set(combo)) < len(allowed):
            continue
        value = math.fsum(cost[g, k] for g, k in enumerate(combo))
        if best is None or value < best:
            best = value
    return best


def brute_force_permutation(cost):
    cost = np.asarray(cost, dtype=float)
    K = cost.shape[0]
    return min(math.fsum(cost[k, p[k]] for k in range(K)) for p in itertools.permutations(range(K)))


def brute_force_mssc(points, K, must_links=(), cannot_links=()):
    """Constrained MSSC optimum over all K^N memberships (all clusters nonempty).

    Uses ``sum ||x||^2 - sum_k ||S_k||^2 / n_k`` vectorised over memberships.
    Returns ``inf`` when no membership is feasible.
    """
    X = np.asarray(points, dtype=float)
    N = X.shape[0]
    phi = np.array(list(itertools.product(range(K), repeat=N)), dtype=np.int8)
    ok = np.ones(len(phi), dtype=bool)
    for i, j in must_links:
        ok &= phi[:, i] == phi[:, j]
    for i, j in cannot_links:
        ok &= phi[:, i] != phi[:, j]
    phi = phi[ok]
    onehot = (phi[:, :, None] == np.arange(K)).astype(float)  # M x N x K
    counts = onehot.sum(axis=1)
    nonempty = (counts > 0).all(axis=1)
    onehot, counts = onehot[nonempty], counts[nonempty]
    if not len(counts):
        return math.inf
    sums = np.einsum("mnk,nd->mkd", onehot, X)
    values = (X**2).sum() - ((sums**2).sum(axis=2) / counts).sum(axis=1)
    return float(values.min())


def random_instance(rng, n_points, n_clusters, n_ml, n_cl, dim=2, spread=10.0):
    """Points plus links consistent with a hidden labelling that uses every cluster."""
    labels = np.concatenate([np.arange(n_clusters), rng.integers(n_clusters, size=n_points - n_clusters)])
    rng.shuffle(labels)
    points = rng.normal(0, 1, size=(n_points, dim)) + spread * rng.normal(size=(n_clusters, dim))[labels]
    ml, cl = set(), set()
    pairs = [(i, j) for i in range(n_points) for j in range(i + 1, n_points)]
    rng.shuffle(pairs)
    for i, j in pairs:
        if labels[i] == labels[j] and len(ml) < n_ml:
            ml.add((int(i), int(j)))
        elif labels[i] != labels[j] and len(cl) < n_cl:
            cl.add((int(i), int(j)))
    return Dataset(points, labels), ConstraintSet(n_points, ml, cl)
