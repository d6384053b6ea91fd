"""Minimum-cost bipartite matching and cluster-center relabelling."""

from __future__ import annotations

import numpy as np

from .model import squared_distances


def _assign_rows(cost: np.ndarray) -> np.ndarray:
    """Shortest augmenting path Hungarian method for an ``n x m`` matrix, ``n <= m``.

    Returns ``col`` with ``col[i]`` the column matched to row ``i``. Runs in
    O(n^2 m) using row/column potentials.
    """
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=np.int64)  # owner[j]: 1-based row matched to column j, 0 = free
    way = np.zeros(m + 1, dtype=np.int64)
    padded = np.zeros((n + 1, m + 1))
    padded[1:, 1:] = cost

    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used
            free[0] = False
            reduced = padded[i0] - u[i0] - v
            better = free & (reduced < minv)
            minv[better] = reduced[better]
            way[better] = j0
            cand = np.where(free, minv, np.inf)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1

    col = np.empty(n, dtype=np.int64)
    for j in range(1, m + 1):
        if owner[j]:
            col[owner[j] - 1] = j - 1
    return col


def rectangular_assignment(cost) -> tuple[np.ndarray, float]:
    """Match every row of an ``n x m`` cost matrix (``n <= m``) to a distinct column."""
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n > m:
        raise ValueError(f"need at least as many columns as rows, got {cost.shape}")
    if n == 0:
        return np.zeros(0, dtype=np.int64), 0.0
    col = _assign_rows(cost)
    return col, float(cost[np.arange(n), col].sum())


def hungarian_match(cost) -> tuple[np.ndarray, float]:
    """Minimum-cost perfect matching on a square cost matrix.

    Returns ``(perm, total)`` where row ``k`` is matched to column ``perm[k]``.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1] or cost.shape[0] < 1:
        raise ValueError(f"cost must be a non-empty square matrix, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost entries must be finite")
    return rectangular_assignment(cost)


def align_centers(reference, target) -> np.ndarray:
    """Reorder the rows of ``target`` to best match the rows of ``reference``.

    The row permutation minimises the total squared distance between paired
    centers, so identical center sets align to a zero difference.
    """
    reference = np.asarray(reference, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if reference.shape != target.shape or reference.ndim != 2:
        raise ValueError(f"center matrices differ in shape: {reference.shape} vs {target.shape}")
    perm, _ = hungarian_match(squared_distances(reference, target))
    return target[perm]
