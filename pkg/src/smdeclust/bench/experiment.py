"""Batch experiments driven by a JSON manifest.

Example manifest::

    {
      "seeds": [0, 1, 2],
      "solvers": ["sg-mde", "blp-km", "cop-km"],
      "reference": "sg-mde",
      "budget": {"pop": 10, "max_iter": 10, "ls_max_iter": 25, "restarts": 100},
      "instances": [
        {"name": "iris-50-50", "group": "iris", "k": 3,
         "dataset": "iris.csv", "label_column": true, "constraints": "iris_50_50.txt"},
        {"name": "syn-500-2", "k": 2,
         "synthetic": {"n": 500, "k": 2, "std": 10, "seed": 1},
         "generate": {"ml": 100, "cl": 100, "seed": 2}}
      ]
    }

Relative paths are resolved against the manifest's directory. Each
(instance, solver, seed) cell yields one record; a cell that raises is
logged, recorded as infeasible and listed under ``errors`` in the summary.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import io
from ..memetic import VARIANTS, MdeConfig, run
from ..model import ConstraintSet
from ..report import BenchRecord, write_report
from .baselines import BASELINES, multistart
from .generate import generate_constraints, generate_synthetic
from .metrics import performance_profiles, relative_delta, summarize, write_profiles

log = logging.getLogger(__name__)

SOLVERS = tuple(VARIANTS) + BASELINES
METRICS = ("mssc_of", "wall_time_s", "n_ls_calls", "n_ls_iters")
# relative gap below which two objective values count as the same result
TIE_RTOL = 1e-9

DEFAULT_BUDGET = {
    "pop": 20,
    "nmax": 500,
    "delta": 1e-4,
    "fmin": 0.5,
    "fmax": 0.8,
    "alpha": 0.5,
    "max_iter": None,
    "ls_max_iter": 25,
    "restarts": 100,
}


@dataclass
class ExperimentReport:
    records: list[BenchRecord]
    summary: dict


def load_instance(entry: dict, base: Path):
    """Dataset and constraints for one manifest instance entry."""
    if "synthetic" in entry:
        syn = entry["synthetic"]
        dataset = generate_synthetic(syn["n"], syn["k"], syn.get("d", 2), syn.get("std", 10.0), syn.get("seed"))
    else:
        dataset = io.load_dataset(base / entry["dataset"], entry.get("label_column", False))
    if "constraints" in entry:
        constraints = io.load_constraints(base / entry["constraints"], dataset.n_points)
    elif "generate" in entry:
        gen = entry["generate"]
        if dataset.labels is None:
            raise ValueError(f"instance {entry['name']!r}: generating constraints needs labels")
        constraints = generate_constraints(dataset.labels, gen.get("ml", 0), gen.get("cl", 0), gen.get("seed"))
    else:
        constraints = ConstraintSet.empty(dataset.n_points)
    return dataset, constraints


def solve_cell(dataset, constraints, k: int, solver: str, seed, budget: dict) -> BenchRecord:
    if solver in VARIANTS:
        config = MdeConfig.for_variant(
            solver,
            pop_size=budget["pop"],
            n_max=budget["nmax"],
            delta=budget["delta"],
            f_range=(budget["fmin"], budget["fmax"]),
            alpha=budget["alpha"],
            max_iterations=budget["max_iter"],
            ls_max_iters=budget["ls_max_iter"],
            seed=seed,
        )
        record = run(dataset, constraints, k, config).record
    elif solver in BASELINES:
        _, record = multistart(solver, dataset, constraints, k, budget["restarts"], budget["ls_max_iter"], seed)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return replace(record, solver=solver, seed=seed)


def _cell(args):
    entry, base, solver, seed, budget = args
    try:
        dataset, constraints = load_instance(entry, base)
        record = solve_cell(dataset, constraints, entry["k"], solver, seed, budget)
        return replace(record, instance=entry["name"]), None
    except Exception as exc:  # a failing cell must not abort the batch
        log.warning("cell %s/%s/seed %s failed: %s", entry["name"], solver, seed, exc)
        failed = BenchRecord(math.inf, None, 0, 0, False, seed, entry["name"], solver)
        return failed, f"{entry['name']}/{solver}/seed {seed}: {type(exc).__name__}: {exc}"


def _mean(values):
    return math.inf if any(math.isinf(v) for v in values) else float(np.mean(values))


def _metric(record: BenchRecord, metric: str) -> float:
    if not record.feasible:
        return math.inf
    value = getattr(record, metric)
    return math.inf if value is None else float(value)


def summarize_records(records: list[BenchRecord], solvers, reference=None, groups=None) -> dict:
    """Delta tables, best-result rates and COP-KM infeasibility rates."""
    groups = groups or {}
    instances = list(dict.fromkeys(r.instance for r in records))
    cell = {}
    for r in records:
        cell.setdefault((r.instance, r.solver), []).append(r)
    mean = {
        (inst, s, m): _mean([_metric(r, m) for r in cell[(inst, s)]])
        for inst, s in cell
        for m in METRICS
    }
    by_group = {}
    for inst in instances:
        by_group.setdefault(groups.get(inst, inst), []).append(inst)

    summary = {"reference": reference, "delta": {}, "percent_best": {}, "percent_unfeasible": {}}
    for group, members in by_group.items():
        if reference is not None:
            table = {}
            for other in solvers:
                if other == reference:
                    continue
                table[other] = {}
                for m in METRICS:
                    deltas = []
                    for inst in members:
                        a, b = mean.get((inst, reference, m)), mean.get((inst, other, m))
                        if a is None or b is None or not (math.isfinite(a) and math.isfinite(b)) or b == 0:
                            continue
                        deltas.append(relative_delta(a, b))
                    table[other][m] = summarize(deltas)
            summary["delta"][group] = table
        best_rates = {}
        for m in ("mssc_of", "n_ls_iters"):
            wins = dict.fromkeys(solvers, 0)
            for inst in members:
                vals = {s: mean[(inst, s, m)] for s in solvers if (inst, s, m) in mean}
                top = min(vals.values())
                if math.isinf(top):
                    continue
                for s, v in vals.items():
                    if v <= top + TIE_RTOL * abs(top):
                        wins[s] += 1
            best_rates[m] = {s: 100.0 * w / len(members) for s, w in wins.items()}
        summary["percent_best"][group] = best_rates
        if "cop-km" in solvers:
            cop = [r for inst in members for r in cell.get((inst, "cop-km"), [])]
            if cop:
                summary["percent_unfeasible"][group] = 100.0 * sum(not r.feasible for r in cop) / len(cop)
    return summary


def profile_curves(records: list[BenchRecord], solvers, metric: str):
    """Profiles over (instance, seed) problems; infeasible runs count as failures."""
    problems = list(dict.fromkeys((r.instance, r.seed) for r in records))
    lookup = {(r.instance, r.seed, r.solver): r for r in records}
    matrix = np.full((len(solvers), len(problems)), np.inf)
    for s, solver in enumerate(solvers):
        for p, (inst, seed) in enumerate(problems):
            r = lookup.get((inst, seed, solver))
            if r is not None:
                matrix[s, p] = _metric(r, metric)
    return performance_profiles(matrix, solvers)


def run_experiment(manifest, out_dir=None, jobs: int = 1) -> ExperimentReport:
    """Run every cell of ``manifest`` (a dict or a JSON file path) and write the reports.

    Writes ``records.jsonl``, ``summary.json`` and ``profile_<metric>.csv``
    into ``out_dir`` when given.
    """
    if isinstance(manifest, (str, Path)):
        base = Path(manifest).resolve().parent
        manifest = json.loads(Path(manifest).read_text())
    else:
        base = Path(manifest.get("base_dir", "."))
    solvers = list(manifest["solvers"])
    unknown = set(solvers) - set(SOLVERS)
    if unknown:
        raise ValueError(f"unknown solvers {sorted(unknown)}; choose from {SOLVERS}")
    budget = {**DEFAULT_BUDGET, **manifest.get("budget", {})}
    seeds = manifest.get("seeds", [0])
    instances = manifest["instances"]
    names = [entry["name"] for entry in instances]
    if len(set(names)) != len(names):
        raise ValueError("instance names must be unique")

    tasks = [(entry, base, solver, seed, budget) for entry in instances for solver in solvers for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell, tasks))
    else:
        results = [_cell(t) for t in tasks]
    records = [r for r, _ in results]
    errors = [e for _, e in results if e]

    groups = {entry["name"]: entry.get("group", entry["name"]) for entry in instances}
    summary = summarize_records(records, solvers, manifest.get("reference", solvers[0]), groups)
    summary["errors"] = errors

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_report(out / "records.jsonl", records)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
        for metric in METRICS:
            try:
                curves = profile_curves(records, solvers, metric)
            except ValueError as exc:
                log.warning("no profile for %s: %s", metric, exc)
                continue
            write_profiles(out / f"profile_{metric}.csv", curves)
    return ExperimentReport(records, summary)


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__}")
