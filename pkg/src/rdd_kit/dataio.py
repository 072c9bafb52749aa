"""CSV ingestion and emission.

Ingestion maps named (or, without a header, integer-indexed) columns onto
the record fields, drops unparseable rows with line-numbered reasons, and
hard-fails if a supplied z column contradicts the declared threshold —
a z/x mismatch means the threshold is wrong, not the row.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import Dataset, ThresholdSpec
from .errors import FileError, SchemaError, ZMismatch

__all__ = [
    "IngestionSchema",
    "IngestionReport",
    "ingest_csv",
    "render_dataset_csv",
    "sha256_of_file",
]

DEFAULT_Z_COLUMN = "z"


@dataclass(frozen=True)
class IngestionSchema:
    """Column mapping for CSV ingestion.

    With header=False the column names are 0-based indices given as
    strings ("0", "1", ...).
    """

    outcome: str = "outcome"
    assignment: str = "assignment"
    treatment: str = "treatment"
    covariates: Tuple[str, ...] = ()
    z_column: Optional[str] = None  # None = auto-detect a "z" header column
    delimiter: str = ","
    header: bool = True


@dataclass(frozen=True)
class IngestionReport:
    rows_read: int
    rows_kept: int
    dropped: Tuple[Tuple[int, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_kept": self.rows_kept,
            "dropped": [[line, reason] for line, reason in self.dropped],
        }


def sha256_of_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _parse_finite(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def _column_index(columns, name: str, header: bool, what: str) -> int:
    if header:
        if name not in columns:
            raise SchemaError(f"{what} column {name!r} not found in header {columns}")
        return columns.index(name)
    try:
        idx = int(name)
    except ValueError:
        raise SchemaError(
            f"{what} column {name!r} must be an integer index when there is no header"
        )
    return idx


def ingest_csv(path, schema: IngestionSchema, threshold: ThresholdSpec):
    """Read a CSV file into a Dataset plus an ingestion report.

    Rows with a wrong field count, unparseable or non-finite numbers, or a
    treatment outside {0, 1} are dropped and reported with their line
    numbers. A z column (explicit, or a header column named 'z') is
    cross-checked against derive_z; any mismatch raises ZMismatch.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}")
    return ingest_csv_text(text, schema, threshold)


def ingest_csv_text(text: str, schema: IngestionSchema, threshold: ThresholdSpec):
    reader = csv.reader(io.StringIO(text), delimiter=schema.delimiter)
    rows = list(reader)
    line_of_row = list(range(1, len(rows) + 1))

    if schema.header:
        if not rows:
            raise SchemaError("empty file: expected a header row")
        header = [h.strip() for h in rows[0]]
        if len(set(header)) != len(header):
            raise SchemaError("duplicate column names in header")
        body = rows[1:]
        lines = line_of_row[1:]
        n_fields = len(header)
    else:
        header = []
        body = rows
        lines = line_of_row
        n_fields = len(rows[0]) if rows else 0

    idx_outcome = _column_index(header, schema.outcome, schema.header, "outcome")
    idx_assignment = _column_index(header, schema.assignment, schema.header, "assignment")
    idx_treatment = _column_index(header, schema.treatment, schema.header, "treatment")
    idx_covs = [
        (name, _column_index(header, name, schema.header, "covariate"))
        for name in schema.covariates
    ]
    idx_z: Optional[int] = None
    if schema.z_column is not None:
        idx_z = _column_index(header, schema.z_column, schema.header, "z")
    elif schema.header and DEFAULT_Z_COLUMN in header:
        idx_z = header.index(DEFAULT_Z_COLUMN)

    needed = [idx_outcome, idx_assignment, idx_treatment] + [i for _, i in idx_covs]
    if idx_z is not None:
        needed.append(idx_z)
    if not schema.header and needed and n_fields and max(needed) >= n_fields:
        raise SchemaError(
            f"column index {max(needed)} out of range for {n_fields}-field rows"
        )

    outcome, assignment, treatment = [], [], []
    covariates: dict[str, list] = {name: [] for name, _ in idx_covs}
    dropped: list[Tuple[int, str]] = []
    for row, line in zip(body, lines):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != n_fields:
            dropped.append((line, f"expected {n_fields} fields, got {len(row)}"))
            continue
        try:
            y = _parse_finite(row[idx_outcome])
            x = _parse_finite(row[idx_assignment])
            t_raw = _parse_finite(row[idx_treatment])
            covs = [_parse_finite(row[i]) for _, i in idx_covs]
        except ValueError as exc:
            dropped.append((line, str(exc)))
            continue
        if t_raw not in (0.0, 1.0):
            dropped.append((line, f"treatment must be 0 or 1, got {row[idx_treatment]!r}"))
            continue
        if idx_z is not None:
            try:
                z_given = _parse_finite(row[idx_z])
            except ValueError as exc:
                dropped.append((line, f"bad z value: {exc}"))
                continue
            if z_given not in (0.0, 1.0):
                dropped.append((line, f"z must be 0 or 1, got {row[idx_z]!r}"))
                continue
            z_derived = 1 if x >= threshold.x0 else 0
            if int(z_given) != z_derived:
                raise ZMismatch(line, int(z_given), z_derived)
        outcome.append(y)
        assignment.append(x)
        treatment.append(int(t_raw))
        for (name, i), v in zip(idx_covs, covs):
            covariates[name].append(v)

    data = Dataset(
        assignment=np.asarray(assignment, dtype=np.float64),
        outcome=np.asarray(outcome, dtype=np.float64),
        treatment=np.asarray(treatment, dtype=np.int64),
        covariates={k: np.asarray(v, dtype=np.float64) for k, v in covariates.items()},
    )
    n_body = sum(1 for row in body if row and any(cell.strip() for cell in row))
    report = IngestionReport(
        rows_read=n_body, rows_kept=len(data), dropped=tuple(dropped)
    )
    return data, report


def _fmt(value: float) -> str:
    return repr(float(value))


def render_dataset_csv(
    data: Dataset,
    *,
    include_z: bool = False,
    threshold: Optional[ThresholdSpec] = None,
    column_order: Sequence[str] = ("outcome", "assignment", "treatment"),
) -> str:
    """Dataset as CSV text with full float precision (round-trip safe)."""
    if include_z and threshold is None:
        raise ValueError("include_z needs a threshold")
    names = list(column_order) + list(data.covariate_names) + (
        ["z"] if include_z else []
    )
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(names)
    base = {
        "outcome": data.outcome,
        "assignment": data.assignment,
        "treatment": data.treatment,
    }
    for i in range(len(data)):
        row = []
        for col in column_order:
            column = base[col]
            row.append(str(int(column[i])) if col == "treatment" else _fmt(column[i]))
        for name in data.covariate_names:
            row.append(_fmt(data.covariates[name][i]))
        if include_z:
            row.append("1" if data.assignment[i] >= threshold.x0 else "0")
        writer.writerow(row)
    return out.getvalue()
