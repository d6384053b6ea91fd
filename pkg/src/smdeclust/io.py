"""Dataset and constraint files.

Dataset: one point per row, comma- or whitespace-separated numbers; ``#``
starts a comment. With ``label_column=True`` the last column holds integer
class labels.

Constraints: one ``ML,i,j`` or ``CL,i,j`` per line with 1-based point indices.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .model import ConstraintSet, Dataset


def _rows(path):
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _split(line: str) -> list[str]:
    if "," in line:
        return [tok.strip() for tok in line.split(",")]
    return line.split()


def load_dataset(path, label_column: bool = False) -> Dataset:
    rows = []
    for lineno, line in _rows(path):
        try:
            rows.append([float(tok) for tok in _split(line)])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-numeric value") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have differing numbers of columns")
    table = np.array(rows)
    if not label_column:
        return Dataset(table)
    if table.shape[1] < 2:
        raise ValueError(f"{path}: need at least one coordinate column besides the labels")
    labels = table[:, -1]
    if not np.all(labels == np.round(labels)):
        raise ValueError(f"{path}: label column is not integer")
    return Dataset(table[:, :-1], labels.astype(np.int64))


def save_dataset(path, dataset: Dataset, with_labels: bool = True) -> None:
    with open(path, "w") as fh:
        for i, point in enumerate(dataset.points):
            fields = [repr(float(x)) for x in point]
            if with_labels and dataset.labels is not None:
                fields.append(str(int(dataset.labels[i])))
            fh.write(",".join(fields) + "\n")


def load_labels(path) -> np.ndarray:
    """Labels from a file with one label per row (or the last column of each row)."""
    labels = []
    for lineno, line in _rows(path):
        tok = _split(line)[-1]
        try:
            value = float(tok)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad label {tok!r}") from exc
        if value != round(value):
            raise ValueError(f"{path}:{lineno}: label {tok!r} is not an integer")
        labels.append(int(round(value)))
    return np.array(labels, dtype=np.int64)


def load_constraints(path, n_points: int) -> ConstraintSet:
    ml, cl = [], []
    for lineno, line in _rows(path):
        parts = [p.strip() for p in line.replace(",", " ").split()]
        if len(parts) != 3 or parts[0].upper() not in ("ML", "CL"):
            raise ValueError(f"{path}:{lineno}: expected 'ML,i,j' or 'CL,i,j'")
        try:
            i, j = int(parts[1]) - 1, int(parts[2]) - 1
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: indices must be integers") from exc
        (ml if parts[0].upper() == "ML" else cl).append((i, j))
    return ConstraintSet(n_points, ml, cl)


def format_constraints(constraints: ConstraintSet) -> str:
    lines = [f"ML,{i + 1},{j + 1}" for i, j in sorted(constraints.must_links)]
    lines += [f"CL,{i + 1},{j + 1}" for i, j in sorted(constraints.cannot_links)]
    return "".join(line + "\n" for line in lines)


def save_constraints(path, constraints: ConstraintSet) -> None:
    Path(path).write_text(format_constraints(constraints))
