"""Relative differences and performance profiles."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


def relative_delta(m: float, m_ref: float) -> float:
    """Percentage difference of ``m`` against ``m_ref``; negative means ``m`` is lower."""
    if m_ref == 0:
        raise ZeroDivisionError("relative difference against a zero reference is undefined")
    return 100.0 * (m - m_ref) / m_ref


@dataclass(frozen=True)
class ProfileCurve:
    solver: str
    taus: np.ndarray
    rhos: np.ndarray

    def rho(self, tau: float) -> float:
        """Step-function value at ``tau`` (for ``tau`` inside the sampled range)."""
        idx = np.searchsorted(self.taus, tau, side="right") - 1
        return float(self.rhos[idx]) if idx >= 0 else 0.0


def performance_profiles(values, solvers=None, n_taus: int = 200) -> list[ProfileCurve]:
    """Profiles from a ``solver x problem`` matrix of positive metric values.

    Failures are ``inf``. For each problem the ratio to the best solver is
    taken; ``rho(tau)`` is the fraction of problems whose ratio is at most
    ``tau``. Curves are sampled on a log grid from 1 to the largest finite
    ratio, plus every ratio actually attained so the steps are exact.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.size == 0:
        raise ValueError("need a non-empty solver x problem matrix")
    if np.isnan(values).any() or (values <= 0).any():
        raise ValueError("metric values must be positive (use inf for failures)")
    n_solvers, n_problems = values.shape
    solvers = [str(i) for i in range(n_solvers)] if solvers is None else list(solvers)
    if len(solvers) != n_solvers:
        raise ValueError("one name per solver row expected")

    best = values.min(axis=0)
    with np.errstate(invalid="ignore"):
        ratios = np.where(np.isfinite(best), values / best, np.inf)
    finite = ratios[np.isfinite(ratios)]
    tau_max = float(finite.max()) if finite.size else 1.0
    grid = np.geomspace(1.0, tau_max, n_taus) if tau_max > 1 else np.array([1.0])
    taus = np.unique(np.concatenate([grid, finite, [1.0, tau_max]]))
    curves = []
    for s, name in enumerate(solvers):
        r = np.sort(ratios[s])
        rhos = np.searchsorted(r, taus, side="right") / n_problems
        curves.append(ProfileCurve(name, taus, rhos))
    return curves


def write_profiles(path, curves: list[ProfileCurve]) -> None:
    """CSV with a ``tau`` column and one ``rho`` column per solver."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau"] + [c.solver for c in curves])
        for i, tau in enumerate(curves[0].taus):
            writer.writerow([f"{tau:.12g}"] + [f"{c.rhos[i]:.6g}" for c in curves])


def summarize(deltas) -> dict:
    """Minimum, median and maximum of the finite deltas (``None`` when there are none)."""
    d = [x for x in deltas if math.isfinite(x)]
    if not d:
        return {"min": None, "median": None, "max": None, "count": 0}
    return {"min": min(d), "median": float(np.median(d)), "max": max(d), "count": len(d)}
