"""Shared data model: records, thresholds, windows and estimate containers.

All value types here are immutable after construction and safe to share
between workers. The threshold indicator Z is never stored on a record;
it is always derived from (assignment, x0) via :func:`derive_z`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "ObservationRecord",
    "ThresholdSpec",
    "Window",
    "AceEstimate",
    "RegimeTag",
    "Dataset",
    "derive_z",
    "partition_window",
    "as_dataset",
]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be a finite real, got {value!r}")
    return value


@dataclass(frozen=True)
class ObservationRecord:
    """One subject: outcome Y, assignment X, treatment T and covariates C."""

    outcome: float
    assignment: float
    treatment: int
    covariates: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "outcome", _require_finite("outcome", self.outcome))
        object.__setattr__(
            self, "assignment", _require_finite("assignment", self.assignment)
        )
        if self.treatment not in (0, 1):
            raise ValueError(f"treatment must be 0 or 1, got {self.treatment!r}")
        object.__setattr__(self, "treatment", int(self.treatment))
        covs = {str(k): _require_finite(f"covariate {k!r}", v) for k, v in self.covariates.items()}
        object.__setattr__(self, "covariates", covs)


@dataclass(frozen=True)
class ThresholdSpec:
    """Treatment threshold x0; the indicator Z = 1{assignment >= x0}."""

    x0: float

    def __post_init__(self):
        object.__setattr__(self, "x0", _require_finite("x0", self.x0))


def derive_z(record: ObservationRecord, threshold: ThresholdSpec) -> int:
    """Threshold indicator: 1 iff assignment >= x0 (the boundary treats)."""
    return 1 if record.assignment >= threshold.x0 else 0


@dataclass(frozen=True)
class Window:
    """Symmetric bandwidth window around the threshold.

    Above side: x0 <= assignment < x0 + bandwidth (closed at x0 so the
    threshold point belongs to exactly one side). Below side:
    x0 - bandwidth < assignment < x0. Outer bounds are strictly open so
    sweeps over nested bandwidths are monotone.
    """

    x0: float
    bandwidth: float

    def __post_init__(self):
        object.__setattr__(self, "x0", _require_finite("x0", self.x0))
        bw = _require_finite("bandwidth", self.bandwidth)
        if bw <= 0:
            raise ValueError(f"bandwidth must be > 0, got {bw}")
        object.__setattr__(self, "bandwidth", bw)

    def side(self, assignment: float) -> str | None:
        """'above', 'below' or None for a single assignment value."""
        if self.x0 <= assignment < self.x0 + self.bandwidth:
            return "above"
        if self.x0 - self.bandwidth < assignment < self.x0:
            return "below"
        return None


class RegimeTag(enum.Enum):
    """Operating regime of a (simulated) dataset.

    The two interventional regimes force the treatment; the observational
    tags record how a real dataset was declared to have arisen.
    """

    INTERVENE_CONTROL = "intervene_control"
    INTERVENE_TREAT = "intervene_treat"
    OBSERVATIONAL_SHARP = "observational_sharp"
    OBSERVATIONAL_FUZZY = "observational_fuzzy"

    @property
    def sigma(self) -> str:
        return {
            RegimeTag.INTERVENE_CONTROL: "0",
            RegimeTag.INTERVENE_TREAT: "1",
            RegimeTag.OBSERVATIONAL_SHARP: "s",
            RegimeTag.OBSERVATIONAL_FUZZY: "f",
        }[self]


@dataclass(frozen=True)
class AceEstimate:
    """Average causal effect at the threshold, with window metadata."""

    point: float
    design: str  # "sharp" | "fuzzy"
    n_above: int
    n_below: int
    bandwidth: float
    std_error: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    compliance_gap: float | None = None

    def __post_init__(self):
        if self.design not in ("sharp", "fuzzy"):
            raise ValueError(f"design must be 'sharp' or 'fuzzy', got {self.design!r}")
        if self.n_above < 2 or self.n_below < 2:
            raise ValueError("both window sides need at least 2 records")
        if self.std_error is not None and self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if (self.ci_low is None) != (self.ci_high is None):
            raise ValueError("ci_low and ci_high must be given together")
        if self.ci_low is not None:
            if not (self.ci_low <= self.point <= self.ci_high):
                raise ValueError(
                    f"confidence interval ({self.ci_low}, {self.ci_high}) "
                    f"does not bracket the point estimate {self.point}"
                )

    def to_dict(self) -> dict:
        return {
            "point": self.point,
            "design": self.design,
            "n_above": self.n_above,
            "n_below": self.n_below,
            "bandwidth": self.bandwidth,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "compliance_gap": self.compliance_gap,
        }


class Dataset:
    """Columnar view of a record list (numpy-backed, read-only).

    Estimators accept either a Dataset or any iterable of
    ObservationRecord; the columnar form is what the simulator emits and
    what the kernels consume.
    """

    def __init__(
        self,
        assignment: np.ndarray,
        outcome: np.ndarray,
        treatment: np.ndarray,
        covariates: Mapping[str, np.ndarray] | None = None,
        regime: RegimeTag | None = None,
    ):
        self.assignment = np.ascontiguousarray(assignment, dtype=np.float64)
        self.outcome = np.ascontiguousarray(outcome, dtype=np.float64)
        self.treatment = np.ascontiguousarray(treatment, dtype=np.int64)
        n = self.assignment.shape[0]
        if self.outcome.shape != (n,) or self.treatment.shape != (n,):
            raise ValueError("column lengths differ")
        if not np.all(np.isfinite(self.assignment)) or not np.all(
            np.isfinite(self.outcome)
        ):
            raise ValueError("assignment and outcome must be finite")
        if not np.all((self.treatment == 0) | (self.treatment == 1)):
            raise ValueError("treatment must be 0/1")
        self.covariates = {
            str(k): np.ascontiguousarray(v, dtype=np.float64)
            for k, v in (covariates or {}).items()
        }
        for name, col in self.covariates.items():
            if col.shape != (n,):
                raise ValueError(f"covariate {name!r} has wrong length")
        self.regime = regime
        for arr in (self.assignment, self.outcome, self.treatment, *self.covariates.values()):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.assignment.shape[0]

    @property
    def covariate_names(self) -> tuple[str, ...]:
        return tuple(self.covariates)

    @classmethod
    def from_records(
        cls, records: Iterable[ObservationRecord], regime: RegimeTag | None = None
    ) -> "Dataset":
        records = list(records)
        names = tuple(records[0].covariates) if records else ()
        for i, r in enumerate(records):
            if tuple(r.covariates) != names:
                raise ValueError(
                    f"record {i} covariate names {tuple(r.covariates)} differ "
                    f"from the dataset's {names}"
                )
        return cls(
            assignment=np.array([r.assignment for r in records], dtype=np.float64),
            outcome=np.array([r.outcome for r in records], dtype=np.float64),
            treatment=np.array([r.treatment for r in records], dtype=np.int64),
            covariates={
                name: np.array([r.covariates[name] for r in records], dtype=np.float64)
                for name in names
            },
            regime=regime,
        )

    def record(self, i: int) -> ObservationRecord:
        return ObservationRecord(
            outcome=float(self.outcome[i]),
            assignment=float(self.assignment[i]),
            treatment=int(self.treatment[i]),
            covariates={k: float(v[i]) for k, v in self.covariates.items()},
        )

    def __iter__(self) -> Iterator[ObservationRecord]:
        return (self.record(i) for i in range(len(self)))

    def take(self, index: np.ndarray) -> "Dataset":
        return Dataset(
            assignment=self.assignment[index],
            outcome=self.outcome[index],
            treatment=self.treatment[index],
            covariates={k: v[index] for k, v in self.covariates.items()},
            regime=self.regime,
        )


def as_dataset(records) -> Dataset:
    """Coerce a Dataset or iterable of records into a Dataset."""
    if isinstance(records, Dataset):
        return records
    return Dataset.from_records(records)


def partition_window(records, window: Window):
    """Split records into (above, below) lists per the window bounds.

    Records outside (x0 - bandwidth, x0 + bandwidth) are excluded; input
    order is preserved within each side. Empty sides are legal here —
    the estimators are the ones that reject them.
    """
    above, below = [], []
    for r in records:
        side = window.side(r.assignment)
        if side == "above":
            above.append(r)
        elif side == "below":
            below.append(r)
    return above, below


def window_masks(data: Dataset, window: Window):
    """Boolean (above, below) masks for a columnar dataset."""
    x = data.assignment
    above = (x >= window.x0) & (x < window.x0 + window.bandwidth)
    below = (x > window.x0 - window.bandwidth) & (x < window.x0)
    return above, below
