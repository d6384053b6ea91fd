"""Per-run benchmark records and their line-oriented report format.

A report is JSON Lines: one record per line, keys in a fixed order. Objective
values are written with 12 significant digits; an infinite objective (a run
that found no feasible solution) is written as ``null``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable

FIELDS = ("instance", "solver", "seed", "mssc_of", "wall_time_s", "n_ls_calls", "n_ls_iters", "feasible")


@dataclass(frozen=True)
class BenchRecord:
    mssc_of: float
    wall_time_s: float | None
    n_ls_calls: int
    n_ls_iters: int
    feasible: bool
    seed: int | None = None
    instance: str = ""
    solver: str = ""

    def normalized(self) -> BenchRecord:
        """The record exactly as it reads back from a report."""
        return replace(
            self,
            mssc_of=_round_of(self.mssc_of),
            wall_time_s=None if self.wall_time_s is None else round(float(self.wall_time_s), 6),
            n_ls_calls=int(self.n_ls_calls),
            n_ls_iters=int(self.n_ls_iters),
            feasible=bool(self.feasible),
        )

    def to_json(self) -> str:
        rec = asdict(self.normalized())
        if math.isinf(rec["mssc_of"]):
            rec["mssc_of"] = None
        return json.dumps({k: rec[k] for k in FIELDS})

    @classmethod
    def from_json(cls, line: str) -> BenchRecord:
        rec = json.loads(line)
        missing = set(FIELDS) - set(rec)
        if missing:
            raise ValueError(f"report line lacks fields {sorted(missing)}")
        if rec["mssc_of"] is None:
            rec["mssc_of"] = math.inf
        return cls(**{k: rec[k] for k in FIELDS})


def _round_of(value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        return math.inf
    return float(f"{value:.12g}")


def format_report(records: Iterable[BenchRecord]) -> str:
    return "".join(r.to_json() + "\n" for r in records)


def write_report(path, records: Iterable[BenchRecord]) -> None:
    Path(path).write_text(format_report(records))


def read_report(path) -> list[BenchRecord]:
    lines = Path(path).read_text().splitlines()
    return [BenchRecord.from_json(line) for line in lines if line.strip()]
