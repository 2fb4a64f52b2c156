"""Datasets and their CSV form: optional header row, response in the last column."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: Optional[int] = None):
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


class EmptyFile(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    column_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError(f"X shape {self.X.shape} does not match y length {self.y.shape[0]}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path) -> Dataset:
    """Read a numeric CSV; a first line with no numeric field is taken as the header.

    Raises :class:`ParseError` (with 1-based line and column) on non-numeric,
    non-finite or ragged rows, and :class:`EmptyFile` when no data rows exist.
    """
    path = Path(path)
    names = None
    rows: list[np.ndarray] = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if lineno == 1 and names is None and not rows:
                numeric = [_is_number(f) for f in fields]
                if not any(numeric):
                    names = tuple(f.strip() for f in fields)
                    width = len(fields)
                    continue
            if width is None:
                width = len(fields)
            if len(fields) != width:
                raise ParseError(f"expected {width} fields, found {len(fields)}", lineno)
            try:
                row = np.array(fields, dtype=float)
            except ValueError:
                col = next(i for i, f in enumerate(fields, start=1) if not _is_number(f))
                raise ParseError(f"not a number: {fields[col - 1]!r}", lineno, col) from None
            if not np.all(np.isfinite(row)):
                col = int(np.flatnonzero(~np.isfinite(row))[0]) + 1
                raise ParseError(f"non-finite value {fields[col - 1]!r}", lineno, col)
            rows.append(row)
    if not rows:
        raise EmptyFile(f"{path} contains no data rows")
    if width < 2:
        raise ParseError("need at least one covariate and the response", 1)
    data = np.vstack(rows)
    return Dataset(data[:, :-1], data[:, -1], names)


def write_csv(path, X, y, column_names: Optional[Sequence[str]] = None) -> None:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if column_names is None:
        column_names = [f"x{j + 1}" for j in range(X.shape[1])] + ["y"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(column_names)
        for xi, yi in zip(X, y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
