"""Multi-start baselines: BLP-KM (constrained K-MEANS with exact assignment) and COP-KM."""

from __future__ import annotations

import math
import time

import numpy as np

from ..localsearch import DEFAULT_MAX_ITERS, CopKMeansFailure, cop_kmeans, ss_kmeans
from ..model import ConstraintSet, Dataset, Solution
from ..report import BenchRecord

BASELINES = ("blp-km", "cop-km")


def multistart(
    method: str,
    dataset: Dataset,
    constraints: ConstraintSet,
    n_clusters: int,
    restarts: int = 100,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed=None,
) -> tuple[Solution | None, BenchRecord]:
    """Best feasible solution over ``restarts`` runs from random data points.

    A COP-KM run that fails, or ends with an empty cluster, contributes
    nothing; if no run is feasible the record carries ``inf`` and
    ``feasible=False``.
    """
    if method not in BASELINES:
        raise ValueError(f"unknown baseline {method!r}")
    if restarts < 1:
        raise ValueError("need at least one restart")
    rng = np.random.default_rng(seed)
    best = None
    iterations = 0
    start = time.perf_counter()
    for _ in range(restarts):
        idx = rng.choice(dataset.n_points, size=n_clusters, replace=False)
        centers = dataset.points[idx]
        if method == "blp-km":
            report = ss_kmeans(dataset, constraints, centers, max_iters)
        else:
            try:
                report = cop_kmeans(dataset, constraints, centers, max_iters)
            except CopKMeansFailure as exc:
                iterations += exc.iterations
                continue
        iterations += report.iterations
        sol = report.solution
        if sol.feasible and (best is None or sol.objective < best.objective):
            best = sol
    elapsed = time.perf_counter() - start
    record = BenchRecord(
        mssc_of=math.inf if best is None else best.objective,
        wall_time_s=elapsed,
        n_ls_calls=restarts,
        n_ls_iters=iterations,
        feasible=best is not None,
        seed=seed,
        solver=method,
    )
    return best, record
