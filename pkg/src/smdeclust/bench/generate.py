"""Synthetic instances and label-driven constraint sampling."""

from __future__ import annotations

import numpy as np

from ..model import ConstraintSet, Dataset

MEAN_BOX = 100.0


def generate_synthetic(n_points: int, n_clusters: int, dim: int = 2, std: float = 10.0, seed=None) -> Dataset:
    """Mixture of isotropic Gaussians with means uniform in ``[0, 100]^dim``.

    Components get ``n_points // n_clusters`` points each, the remainder going
    to the last one. Points are ordered by component; labels are component ids.
    """
    if n_clusters < 1 or n_points < n_clusters:
        raise ValueError("need 1 <= n_clusters <= n_points")
    rng = np.random.default_rng(seed)
    means = rng.uniform(0.0, MEAN_BOX, size=(n_clusters, dim))
    counts = np.full(n_clusters, n_points // n_clusters)
    counts[-1] += n_points - counts.sum()
    labels = np.repeat(np.arange(n_clusters), counts)
    points = means[labels] + rng.normal(0.0, std, size=(n_points, dim)) if std > 0 else means[labels].copy()
    return Dataset(points, labels)


def generate_constraints(labels, n_ml: int, n_cl: int, seed=None) -> ConstraintSet:
    """Sample distinct point pairs until ``n_ml`` same-label and ``n_cl`` cross-label pairs are found.

    Same-label pairs become must-links and cross-label pairs cannot-links; a
    pair whose quota is already met is discarded.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n_ml < 0 or n_cl < 0:
        raise ValueError("quotas must be nonnegative")
    _, counts = np.unique(labels, return_counts=True)
    same = int((counts * (counts - 1) // 2).sum())
    cross = n * (n - 1) // 2 - same
    if n_ml > same or n_cl > cross:
        raise ValueError(
            f"cannot draw {n_ml} must-links and {n_cl} cannot-links: "
            f"only {same} same-label and {cross} cross-label pairs exist"
        )
    rng = np.random.default_rng(seed)
    seen, ml, cl = set(), [], []
    while len(ml) < n_ml or len(cl) < n_cl:
        i, j = rng.choice(n, size=2, replace=False)
        pair = (int(min(i, j)), int(max(i, j)))
        if pair in seen:
            continue
        seen.add(pair)
        if labels[i] == labels[j]:
            if len(ml) < n_ml:
                ml.append(pair)
        elif len(cl) < n_cl:
            cl.append(pair)
    return ConstraintSet(n, ml, cl)
