"""Command line interface: ``smdeclust <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .bench.baselines import multistart
from .bench.experiment import METRICS, profile_curves, run_experiment
from .bench.generate import generate_constraints, generate_synthetic
from .bench.metrics import write_profiles
from .memetic import VARIANTS, MdeConfig, run
from .model import ConstraintSet
from .report import format_report, read_report


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _instance(args):
    dataset = io.load_dataset(args.dataset, args.label_column)
    if args.constraints:
        constraints = io.load_constraints(args.constraints, dataset.n_points)
    else:
        constraints = ConstraintSet.empty(dataset.n_points)
    return dataset, constraints


def _add_instance_args(p):
    p.add_argument("--dataset", required=True, help="points file, one point per row")
    p.add_argument("--label-column", action="store_true", help="last dataset column holds class labels")
    p.add_argument("--constraints", help="file of ML,i,j / CL,i,j lines (1-based)")
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ls-max-iter", type=int, default=25, help="local search iteration cap")
    p.add_argument("--timing", action="store_true", help="record wall time (makes reports non-reproducible)")
    p.add_argument("--out", help="report file (JSON lines); stdout if omitted")
    p.add_argument("--membership-out", help="write the best membership (1-based clusters), one per line")


def _finish(args, record, solution):
    record = replace(record, instance=Path(args.dataset).stem)
    if not args.timing:
        record = replace(record, wall_time_s=None)
    _emit(format_report([record]), args.out)
    if args.membership_out and solution is not None:
        Path(args.membership_out).write_text("".join(f"{k + 1}\n" for k in solution.membership))


def cmd_solve(args):
    dataset, constraints = _instance(args)
    config = MdeConfig(
        pop_size=args.pop,
        n_max=args.nmax,
        delta=args.delta,
        f_range=(args.fmin, args.fmax),
        alpha=args.alpha,
        mutation=args.mutation == "on",
        assignment=args.assign,
        max_iterations=args.max_iter,
        ls_max_iters=args.ls_max_iter,
        seed=args.seed,
        stagnation=args.stagnation,
    )
    result = run(dataset, constraints, args.k, config)
    solver = next(name for name, mode in VARIANTS.items() if mode == (config.mutation, config.assignment))
    _finish(args, replace(result.record, solver=solver), result.best)


def cmd_baseline(args):
    dataset, constraints = _instance(args)
    best, record = multistart(args.method, dataset, constraints, args.k, args.restarts, args.ls_max_iter, args.seed)
    _finish(args, record, best)


def cmd_gen_constraints(args):
    labels = io.load_labels(args.labels)
    constraints = generate_constraints(labels, args.ml, args.cl, args.seed)
    _emit(io.format_constraints(constraints), args.out)


def cmd_gen_synthetic(args):
    dataset = generate_synthetic(args.n, args.k, args.d, args.std, args.seed)
    if args.out:
        io.save_dataset(args.out, dataset)
    else:
        for point, label in zip(dataset.points, dataset.labels):
            sys.stdout.write(",".join(repr(float(x)) for x in point) + f",{label}\n")


def cmd_profile(args):
    records = [r for path in args.reports for r in read_report(path)]
    solvers = args.solvers or list(dict.fromkeys(r.solver for r in records))
    curves = profile_curves(records, solvers, args.metric)
    if args.out:
        write_profiles(args.out, curves)
    else:
        for c in curves:
            print(c.solver, " ".join(f"{t:.4g}:{r:.3g}" for t, r in zip(c.taus, c.rhos)))


def cmd_experiment(args):
    report = run_experiment(args.manifest, args.out_dir, args.jobs)
    print(f"{len(report.records)} records written to {args.out_dir}")
    for err in report.summary["errors"]:
        print("error:", err, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smdeclust", description="Semi-supervised MSSC by memetic differential evolution")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the memetic solver on one instance")
    _add_instance_args(p)
    p.add_argument("--pop", type=int, default=20)
    p.add_argument("--nmax", type=int, default=500)
    p.add_argument("--delta", type=float, default=1e-4)
    p.add_argument("--fmin", type=float, default=0.5)
    p.add_argument("--fmax", type=float, default=0.8)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--mutation", choices=("on", "off"), default="off")
    p.add_argument("--assign", choices=("exact", "greedy"), default="greedy")
    p.add_argument("--max-iter", type=int, default=None, help="cap on population sweeps")
    p.add_argument("--stagnation", choices=("sweep", "replacement"), default="sweep")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("baseline", help="multi-start COP-KM or BLP-KM")
    _add_instance_args(p)
    p.add_argument("--method", choices=("cop-km", "blp-km"), required=True)
    p.add_argument("--restarts", type=int, default=100)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("gen-constraints", help="sample constraints from class labels")
    p.add_argument("--labels", required=True, help="one label per row (last column used)")
    p.add_argument("--ml", type=int, default=0)
    p.add_argument("--cl", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_constraints)

    p = sub.add_parser("gen-synthetic", help="Gaussian mixture dataset with label column")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--std", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("profile", help="performance profile data from reports")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--metric", choices=METRICS, default="mssc_of")
    p.add_argument("--solvers", nargs="+", help="solver order (default: order of appearance)")
    p.add_argument("--out", help="CSV output; stdout summary if omitted")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("experiment", help="run a manifest of cells")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
