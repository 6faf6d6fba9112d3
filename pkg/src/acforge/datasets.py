"""Ingestion of labeled tabular datasets and prediction-probability matrices.

CSV in, immutable tables out. The model runtime that produced the predictions
is out of scope: probabilities arrive precomputed, with columns in the
lexicographically sorted class order of the table they accompany.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

ROW_SUM_TOLERANCE = 1e-6

NUMERIC = "numeric"
TEXT = "text"


def _parse_cell(raw: str) -> tuple[bool, object]:
    text = raw.strip()
    try:
        return True, float(text)
    except ValueError:
        return False, text


def canonical_cell(value: object) -> str:
    """Full-precision text form used for exact row comparison."""
    if isinstance(value, float):
        return repr(value)
    return str(value).strip()


@dataclass(frozen=True)
class LabeledTable:
    columns: tuple[str, ...]
    label_column: str
    column_kinds: tuple[str, ...]
    rows: tuple[tuple[object, ...], ...]
    class_names: tuple[str, ...]
    data_version: str

    def __post_init__(self):
        if len(self.columns) != len(set(self.columns)):
            raise ValidationError("column names must be unique")
        if self.label_column not in self.columns:
            raise ValidationError(f"label column {self.label_column!r} not present")
        if not self.rows:
            raise ValidationError("table must have at least one row")
        bad = set(self.labels) - set(self.class_names)
        if bad:
            raise ValidationError(f"labels outside class_names: {sorted(bad)}")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def label_index(self) -> int:
        return self.columns.index(self.label_column)

    @property
    def labels(self) -> tuple[str, ...]:
        idx = self.label_index
        return tuple(str(row[idx]) for row in self.rows)

    @property
    def feature_columns(self) -> tuple[str, ...]:
        return tuple(c for c in self.columns if c != self.label_column)

    @property
    def numeric_feature_columns(self) -> tuple[str, ...]:
        return tuple(
            c
            for c, kind in zip(self.columns, self.column_kinds)
            if kind == NUMERIC and c != self.label_column
        )

    def label_indices(self) -> np.ndarray:
        """Labels as integer indices into class_names."""
        lookup = {name: i for i, name in enumerate(self.class_names)}
        return np.array([lookup[label] for label in self.labels], dtype=np.int64)

    def feature_values(self, column: str) -> list:
        idx = self.columns.index(column)
        return [row[idx] for row in self.rows]

    def numeric_matrix(self, columns: Sequence[str] | None = None) -> np.ndarray:
        """Rows x selected numeric feature columns as float64."""
        selected = tuple(columns) if columns is not None else self.numeric_feature_columns
        for column in selected:
            if column not in self.columns:
                raise ValidationError(f"unknown column {column!r}")
            kind = self.column_kinds[self.columns.index(column)]
            if kind != NUMERIC or column == self.label_column:
                raise ValidationError(f"column {column!r} is not a numeric feature")
        if not selected:
            raise ValidationError("no numeric feature columns available")
        indices = [self.columns.index(c) for c in selected]
        return np.array(
            [[float(row[i]) for i in indices] for row in self.rows], dtype=np.float64
        )

    def canonical_rows(self) -> list[tuple[str, ...]]:
        """Per-row canonical text cells (features and label), for exact matching."""
        return [tuple(canonical_cell(cell) for cell in row) for row in self.rows]

    def schema(self) -> tuple:
        return (self.columns, self.label_column, self.column_kinds)


def load_labeled_table(
    path: Path | str, label_column: str, data_version: str
) -> LabeledTable:
    """Read a header-ed CSV into a LabeledTable; classes are sorted distinct labels."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"dataset file not found: {path}")
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path.name}: file is empty") from None
        header = [h.strip() for h in header]
        raw_rows = [row for row in reader if row]
    if len(header) != len(set(header)):
        raise ValidationError(f"{path.name}: duplicate column names")
    if label_column not in header:
        raise ValidationError(f"{path.name}: missing label column {label_column!r}")
    if not raw_rows:
        raise ValidationError(f"{path.name}: no data rows")
    for i, row in enumerate(raw_rows):
        if len(row) != len(header):
            raise ValidationError(
                f"{path.name}: row {i + 1} has {len(row)} cells, expected {len(header)}"
            )
    label_idx = header.index(label_column)
    n_cols = len(header)
    kinds = []
    for col in range(n_cols):
        if col == label_idx:
            kinds.append(TEXT)  # labels are categorical even when numeric-looking
            continue
        numeric = all(_parse_cell(row[col])[0] for row in raw_rows)
        kinds.append(NUMERIC if numeric else TEXT)
    rows = []
    for row in raw_rows:
        cells = []
        for col, raw in enumerate(row):
            if kinds[col] == NUMERIC:
                cells.append(_parse_cell(raw)[1])
            else:
                cells.append(raw.strip())
        rows.append(tuple(cells))
    labels = sorted({str(row[label_idx]) for row in rows})
    if any(not label for label in labels):
        raise ValidationError(f"{path.name}: empty label value")
    return LabeledTable(
        columns=tuple(header),
        label_column=label_column,
        column_kinds=tuple(kinds),
        rows=tuple(rows),
        class_names=tuple(labels),
        data_version=data_version,
    )


def collapse_classes(table: LabeledTable, keep: str, other_name: str) -> LabeledTable:
    """Relabel every class except `keep` to `other_name` (binary collapse)."""
    if keep not in table.class_names:
        raise ValidationError(f"class {keep!r} not present in {table.class_names}")
    if not other_name or other_name == keep:
        raise ValidationError("collapsed class name must be non-empty and differ from keep")
    idx = table.label_index
    rows = tuple(
        row if str(row[idx]) == keep else row[:idx] + (other_name,) + row[idx + 1:]
        for row in table.rows
    )
    return dataclasses.replace(
        table, rows=rows, class_names=tuple(sorted((other_name, keep)))
    )


@dataclass(frozen=True)
class PredictionMatrix:
    probs: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        probs = self.probs
        if probs.ndim != 2 or probs.shape[1] != len(self.class_names):
            raise ValidationError(
                f"prediction matrix shape {probs.shape} does not match"
                f" {len(self.class_names)} classes"
            )
        if probs.shape[0] < 1:
            raise ValidationError("prediction matrix must have at least one row")
        if np.min(probs) < 0.0 or np.max(probs) > 1.0:
            raise ValidationError("probabilities must lie in [0, 1]")
        sums = probs.sum(axis=1)
        off = np.abs(sums - 1.0)
        if np.any(off > ROW_SUM_TOLERANCE):
            bad = int(np.argmax(off))
            raise ValidationError(
                f"row {bad} probabilities sum to {float(sums[bad])!r},"
                f" outside 1 +/- {ROW_SUM_TOLERANCE}"
            )

    @property
    def n(self) -> int:
        return int(self.probs.shape[0])

    @property
    def n_classes(self) -> int:
        return int(self.probs.shape[1])


def load_prediction_matrix(path: Path | str, table: LabeledTable) -> PredictionMatrix:
    """Read per-row per-class probabilities aligned to the table's class order."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"prediction file not found: {path}")
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path.name}: file is empty") from None
        raw_rows = [row for row in reader if row]
    k = len(table.class_names)
    if len(header) != k:
        raise ValidationError(
            f"{path.name}: {len(header)} probability columns for {k} classes"
        )
    if len(raw_rows) != table.n:
        raise ValidationError(
            f"{path.name}: {len(raw_rows)} rows for a table of {table.n} rows"
        )
    values = []
    for i, row in enumerate(raw_rows):
        if len(row) != k:
            raise ValidationError(f"{path.name}: row {i + 1} has {len(row)} cells")
        try:
            values.append([float(cell) for cell in row])
        except ValueError as exc:
            raise ValidationError(f"{path.name}: row {i + 1}: {exc}") from exc
    return PredictionMatrix(
        probs=np.array(values, dtype=np.float64), class_names=table.class_names
    )
