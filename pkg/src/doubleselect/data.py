"""CSV ingestion of outcome / treatment / control columns."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DataError

__all__ = ["Dataset", "ingest_csv", "read_columns"]

MIN_ROWS = 3


@dataclass
class Dataset:
    """Complete-case data for one estimation.

    ``values`` holds the outcome, the treatment and the controls in that
    column order; ``rows_dropped`` counts rows removed because a used cell
    was empty.
    """

    outcome: str
    treatment: str
    controls: list[str]
    amelioration: list[str] = field(default_factory=list)
    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    rows_dropped: int = 0

    @property
    def columns(self) -> list[str]:
        return [self.outcome, self.treatment, *self.controls]

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def y(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def d(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def X(self) -> np.ndarray:
        return self.values[:, 2:]

    def to_csv(self, path) -> None:
        """Write the used columns; floats are written with ``repr`` so they round-trip."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.values:
                writer.writerow([repr(float(v)) for v in row])


def _read_csv(path):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: file is empty") from None
            body = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except (UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"{path}: malformed CSV: {exc}") from exc
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    return header, body


def read_columns(path, columns: Sequence[str] | None = None):
    """Numeric matrix of the named columns (all columns when ``None``).

    Rows with an empty cell in any requested column are dropped.
    Returns ``(names, values, rows_dropped)``.
    """
    header, body = _read_csv(path)
    used = list(header) if columns is None else list(columns)
    missing = [c for c in used if c not in header]
    if missing:
        raise ArgumentError(f"columns not found in {path}: {', '.join(missing)}")
    if len(set(used)) != len(used):
        raise ArgumentError("column roles must be distinct")
    pos = [header.index(c) for c in used]
    rows, dropped = [], 0
    for lineno, record in enumerate(body, start=2):
        if not record:
            continue
        if len(record) != len(header):
            raise DataError(f"{path}: row {lineno} has {len(record)} fields, expected {len(header)}")
        cells = [record[k].strip() for k in pos]
        if any(c == "" for c in cells):
            dropped += 1
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            bad = next(i for i, c in enumerate(cells) if not _is_number(c))
            raise DataError(
                f"{path}: non-numeric value {cells[bad]!r} at row {lineno}, column {used[bad]!r}"
            ) from None
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(used))
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: non-finite values in used columns")
    if values.shape[0] < MIN_ROWS:
        raise DataError(f"{path}: only {values.shape[0]} complete rows, need at least {MIN_ROWS}")
    return used, values, dropped


def ingest_csv(path, outcome: str, treatment: str, controls: Sequence[str] | None = None,
               amelioration: Sequence[str] = ()) -> Dataset:
    """Read an RFC-4180 CSV file with a header row.

    Parameters
    ----------
    path : path-like
    outcome, treatment : str
        Column names.
    controls : sequence of str, optional
        Control columns; ``None`` means every other column.
    amelioration : sequence of str
        Controls forced into the final regression; must be among ``controls``.

    Raises
    ------
    DataError
        Unreadable file, non-numeric cell in a used column, or fewer than
        three complete rows.
    ArgumentError
        Unknown or conflicting column names.
    """
    if controls is None:
        header, _ = _read_csv(path)
        controls = [h for h in header if h not in (outcome, treatment)]
    controls = list(controls)
    stray = [a for a in amelioration if a not in controls]
    if stray:
        raise ArgumentError(f"amelioration columns are not controls: {', '.join(stray)}")
    _, values, dropped = read_columns(path, [outcome, treatment, *controls])
    return Dataset(outcome, treatment, controls, list(amelioration), values, dropped)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True
