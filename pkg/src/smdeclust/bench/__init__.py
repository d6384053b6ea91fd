"""Benchmark harness: instance generation, baselines, metrics and experiments."""

from .baselines import multistart
from .generate import generate_constraints, generate_synthetic
from .metrics import ProfileCurve, performance_profiles, relative_delta

__all__ = [
    "ProfileCurve",
    "generate_constraints",
    "generate_synthetic",
    "multistart",
    "performance_profiles",
    "relative_delta",
]
