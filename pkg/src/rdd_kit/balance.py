"""Covariate-balance summaries above and below the threshold.

Produces, per bandwidth and covariate, the summary statistics used to
eyeball whether confounders are similarly distributed on both sides of
the threshold: mean, median, sample standard deviation, minimum and
maximum for the Z=0 and Z=1 groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ThresholdSpec, Window, as_dataset, window_masks
from .errors import EmptyCell, UnknownCovariate

__all__ = ["BalanceRow", "summarize_balance"]


@dataclass(frozen=True)
class BalanceRow:
    """Summary statistics for one (bandwidth, covariate, side) cell."""

    bandwidth: float
    covariate: str
    group: str  # "Z=0" | "Z=1"
    mean: float
    median: float
    std_dev: float
    minimum: float
    maximum: float
    n: int
    sd_defined: bool = True  # False when n == 1 (SD reported as 0)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a balance cell needs at least one record")
        if not (self.minimum <= self.median <= self.maximum):
            raise ValueError("min <= median <= max violated")
        if self.std_dev < 0:
            raise ValueError("std_dev must be >= 0")

    def to_dict(self) -> dict:
        return {
            "bandwidth": self.bandwidth,
            "covariate": self.covariate,
            "group": self.group,
            "mean": self.mean,
            "median": self.median,
            "std_dev": self.std_dev,
            "minimum": self.minimum,
            "maximum": self.maximum,
            "n": self.n,
            "sd_defined": self.sd_defined,
        }


def _cell(values: np.ndarray, bandwidth: float, covariate: str, group: str) -> BalanceRow:
    # statistics are computed on sorted values so that every row is a pure
    # function of the multiset (record order cannot change a single ulp)
    ordered = np.sort(values)
    n = ordered.shape[0]
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0
    return BalanceRow(
        bandwidth=bandwidth,
        covariate=covariate,
        group=group,
        mean=float(ordered.mean()),
        median=float(median),
        std_dev=float(ordered.std(ddof=1)) if n > 1 else 0.0,
        minimum=float(ordered[0]),
        maximum=float(ordered[-1]),
        n=int(n),
        sd_defined=n > 1,
    )


def summarize_balance(
    records,
    threshold: ThresholdSpec,
    bandwidths: Sequence[float],
    covariates: Sequence[str],
) -> list[BalanceRow]:
    """Balance rows ordered (bandwidth, covariate input order, Z=0 then Z=1).

    Raises UnknownCovariate for a missing column and EmptyCell when a side
    has no records at some bandwidth.
    """
    data = as_dataset(records)
    for name in covariates:
        if name not in data.covariates:
            raise UnknownCovariate(
                f"covariate {name!r} not in dataset (have: {', '.join(data.covariate_names) or 'none'})"
            )
    rows = []
    for bw in bandwidths:
        window = Window(threshold.x0, bw)
        above, below = window_masks(data, window)
        for side, mask in (("Z=0", below), ("Z=1", above)):
            if not mask.any():
                raise EmptyCell(f"no records on side {side} at bandwidth {bw}")
        for name in covariates:
            column = data.covariates[name]
            for group, mask in (("Z=0", below), ("Z=1", above)):
                rows.append(_cell(column[mask], bw, name, group))
    return rows
