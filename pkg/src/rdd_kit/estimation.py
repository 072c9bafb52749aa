"""Sharp and fuzzy estimators of the average causal effect at the threshold.

Both designs fit unweighted least-squares lines to the outcome against the
centered assignment on each side of the threshold within the bandwidth
window. The sharp estimate is the intercept difference; the fuzzy (Wald)
estimate divides that jump by the compliance gap, the difference in
observed treatment rates between the sides. Uncertainty comes from a
case-resampling bootstrap by default, with a first-order delta-method
standard error as the cheap analytic alternative.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import backend
from ._kernels_py import FLAG_OK
from .core import AceEstimate, Dataset, ThresholdSpec, Window, as_dataset, window_masks
from .errors import (
    BootstrapDegenerate,
    DegenerateDesign,
    EmptySide,
    NotSharp,
    TooFewPoints,
    WeakDiscontinuity,
)
from .rng import STREAM_BOOTSTRAP, stream_generator

__all__ = [
    "LinearFit",
    "ComplianceRates",
    "BootstrapResult",
    "SweepEntry",
    "fit_local_linear",
    "compliance_rates",
    "estimate_sharp",
    "estimate_fuzzy",
    "bootstrap_uncertainty",
    "bandwidth_sweep",
]

# 97.5% standard normal quantile, for the analytic intervals
_Z975 = 1.959963984540054

DEFAULT_MIN_GAP = 0.05
DEFAULT_REPLICATIONS = 2000
MAX_FAILED_FRACTION = 0.20


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line of outcome on centered assignment for one side."""

    intercept: float
    slope: float
    n: int
    residual_variance: float
    intercept_se: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a linear fit needs at least 2 points")
        if self.residual_variance < 0 or self.intercept_se < 0:
            raise ValueError("variance estimates must be >= 0")


@dataclass(frozen=True)
class ComplianceRates:
    """Observed treatment rates just above / below the threshold."""

    pi_above: float
    pi_below: float

    @property
    def gap(self) -> float:
        return self.pi_above - self.pi_below


@dataclass(frozen=True)
class BootstrapResult:
    std_error: float
    ci_low: float
    ci_high: float
    n_failed: int
    n_replications: int


@dataclass(frozen=True)
class SweepEntry:
    """One bandwidth's outcome in a sweep: an estimate or a captured error."""

    bandwidth: float
    estimate: Optional[AceEstimate] = None
    error: Optional[str] = None
    message: Optional[str] = None


def _fit_arrays(xc: np.ndarray, y: np.ndarray) -> LinearFit:
    n = xc.shape[0]
    if n < 2:
        raise TooFewPoints(f"need at least 2 points for a linear fit, got {n}")
    if xc.min() == xc.max():
        raise DegenerateDesign(
            "centered assignment values are all equal; intercept and slope "
            "are not jointly identifiable"
        )
    mx = xc.mean()
    my = y.mean()
    dx = xc - mx
    dy = y - my
    sxx = float(dx @ dx)
    sxy = float(dx @ dy)
    if sxx <= 0.0:
        raise DegenerateDesign("zero variance in centered assignment")
    slope = sxy / sxx
    intercept = my - slope * mx
    resid = y - (intercept + slope * xc)
    rss = float(resid @ resid)
    residual_variance = rss / (n - 2) if n > 2 else 0.0
    intercept_se = math.sqrt(residual_variance * (1.0 / n + mx * mx / sxx))
    return LinearFit(
        intercept=float(intercept),
        slope=float(slope),
        n=int(n),
        residual_variance=float(residual_variance),
        intercept_se=float(intercept_se),
    )


def fit_local_linear(records, x0: float) -> LinearFit:
    """Ordinary least squares of outcome on assignment centered at x0."""
    data = as_dataset(records)
    return _fit_arrays(data.assignment - float(x0), data.outcome)


def _adjusted_intercept(xc, y, covariates) -> tuple[float, float, float]:
    """Intercept, its SE and residual variance with linear covariate terms."""
    n = xc.shape[0]
    design = np.column_stack([np.ones(n), xc, *covariates])
    p = design.shape[1]
    if n <= p:
        raise TooFewPoints(f"adjusted fit needs more than {p} points, got {n}")
    gram = design.T @ design
    try:
        coef = np.linalg.solve(gram, design.T @ y)
        gram_inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError:
        raise DegenerateDesign("singular design matrix in covariate-adjusted fit")
    resid = y - design @ coef
    sigma2 = float(resid @ resid) / (n - p)
    se = math.sqrt(max(sigma2 * gram_inv[0, 0], 0.0))
    return float(coef[0]), se, sigma2


def _check_aligned(threshold: ThresholdSpec, window: Window) -> None:
    if threshold.x0 != window.x0:
        raise ValueError(
            f"window is centered at {window.x0} but the threshold is {threshold.x0}"
        )


def _window_arrays(data: Dataset, window: Window):
    above_mask, below_mask = window_masks(data, window)
    keep = above_mask | below_mask
    xc = data.assignment[keep] - window.x0
    y = data.outcome[keep]
    t = data.treatment[keep].astype(np.float64)
    above = above_mask[keep]
    cov = {k: v[keep] for k, v in data.covariates.items()}
    return xc, y, t, above, cov


@dataclass(frozen=True)
class _WindowFit:
    """Both side fits plus compliance bookkeeping for one window."""

    fit_above: object
    fit_below: object
    rates: ComplianceRates
    n_above: int
    n_below: int
    numerator: float
    se_numerator: float


def _fit_window(xc, y, t, above, cov, adjust: Sequence[str] | None):
    n_above = int(above.sum())
    n_below = int((~above).sum())
    if n_above < 2 or n_below < 2:
        raise TooFewPoints(
            f"both window sides need at least 2 records "
            f"(above={n_above}, below={n_below})"
        )
    sides = []
    for mask in (above, ~above):
        if adjust:
            covs = [cov[name][mask] for name in adjust]
            b0, se, _ = _adjusted_intercept(xc[mask], y[mask], covs)
            sides.append((b0, se, None))
        else:
            fit = _fit_arrays(xc[mask], y[mask])
            sides.append((fit.intercept, fit.intercept_se, fit))
    (b0a, sea, fa), (b0b, seb, fb) = sides
    rates = ComplianceRates(
        pi_above=float(t[above].mean()), pi_below=float(t[~above].mean())
    )
    return _WindowFit(
        fit_above=fa,
        fit_below=fb,
        rates=rates,
        n_above=n_above,
        n_below=n_below,
        numerator=b0a - b0b,
        se_numerator=math.sqrt(sea * sea + seb * seb),
    )


def compliance_rates(above, below) -> ComplianceRates:
    """Mean treatment indicator on each side (pi_a, pi_b)."""
    above = list(above)
    below = list(below)
    if not above or not below:
        raise EmptySide("compliance rates need records on both sides")
    return ComplianceRates(
        pi_above=sum(r.treatment for r in above) / len(above),
        pi_below=sum(r.treatment for r in below) / len(below),
    )


def _resolve_uncertainty(
    design: str,
    point: float,
    wf: _WindowFit,
    data: Dataset,
    threshold: ThresholdSpec,
    window: Window,
    uncertainty: str,
    replications: int,
    seed: int,
    min_gap: float,
    adjust,
):
    if uncertainty == "none":
        if design == "sharp":
            return wf.se_numerator, None, None
        return None, None, None
    if uncertainty == "delta":
        if design == "sharp":
            se = wf.se_numerator
        else:
            gap = wf.rates.gap
            pia, pib = wf.rates.pi_above, wf.rates.pi_below
            # first-order expansion of the ratio, treating the intercept jump
            # and the binomial compliance rates as independent
            var_gap = pia * (1 - pia) / wf.n_above + pib * (1 - pib) / wf.n_below
            se = math.sqrt(
                wf.se_numerator**2 / gap**2 + wf.numerator**2 * var_gap / gap**4
            )
        return se, point - _Z975 * se, point + _Z975 * se
    if uncertainty == "bootstrap":
        boot = bootstrap_uncertainty(
            data,
            threshold,
            window,
            design,
            replications=replications,
            seed=seed,
            min_gap=min_gap,
            adjust=adjust,
        )
        if not boot.ci_low <= point <= boot.ci_high:
            # keeps AceEstimate's bracketing invariant a typed failure
            raise BootstrapDegenerate(
                f"percentile interval ({boot.ci_low}, {boot.ci_high}) does not "
                f"bracket the point estimate {point}"
            )
        return boot.std_error, boot.ci_low, boot.ci_high
    raise ValueError(f"unknown uncertainty method {uncertainty!r}")


def estimate_sharp(
    records,
    threshold: ThresholdSpec,
    window: Window,
    *,
    uncertainty: str = "delta",
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    adjust: Sequence[str] | None = None,
) -> AceEstimate:
    """Intercept-difference estimate for a sharp design.

    Requires strict rule adherence within the window (T = Z for every
    record); raises NotSharp otherwise.
    """
    _check_aligned(threshold, window)
    data = as_dataset(records)
    xc, y, t, above, cov = _window_arrays(data, window)
    if np.any(t[above] != 1) or np.any(t[~above] != 0):
        raise NotSharp(
            "within-window records violate T = Z; use the fuzzy estimator"
        )
    wf = _fit_window(xc, y, t, above, cov, adjust)
    point = wf.numerator
    se, lo, hi = _resolve_uncertainty(
        "sharp", point, wf, data, threshold, window,
        uncertainty, replications, seed, DEFAULT_MIN_GAP, adjust,
    )
    return AceEstimate(
        point=point,
        design="sharp",
        n_above=wf.n_above,
        n_below=wf.n_below,
        bandwidth=window.bandwidth,
        std_error=se,
        ci_low=lo,
        ci_high=hi,
        compliance_gap=None,
    )


def estimate_fuzzy(
    records,
    threshold: ThresholdSpec,
    window: Window,
    min_gap: float = DEFAULT_MIN_GAP,
    *,
    uncertainty: str = "bootstrap",
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    adjust: Sequence[str] | None = None,
) -> AceEstimate:
    """Wald ratio estimate: intercept jump over compliance gap."""
    _check_aligned(threshold, window)
    data = as_dataset(records)
    xc, y, t, above, cov = _window_arrays(data, window)
    wf = _fit_window(xc, y, t, above, cov, adjust)
    gap = wf.rates.gap
    if abs(gap) < min_gap:
        raise WeakDiscontinuity(
            f"compliance gap {gap:.4f} below min_gap {min_gap}; the Wald "
            "denominator is unstable"
        )
    point = wf.numerator / gap
    se, lo, hi = _resolve_uncertainty(
        "fuzzy", point, wf, data, threshold, window,
        uncertainty, replications, seed, min_gap, adjust,
    )
    return AceEstimate(
        point=point,
        design="fuzzy",
        n_above=wf.n_above,
        n_below=wf.n_below,
        bandwidth=window.bandwidth,
        std_error=se,
        ci_low=lo,
        ci_high=hi,
        compliance_gap=gap,
    )


def _bootstrap_python_adjusted(
    xc, y, t, above, cov, idx, design, min_gap, adjust
):
    """Replicate loop for covariate-adjusted bootstraps (no kernel path)."""
    points = np.full(idx.shape[0], np.nan)
    n_failed = 0
    for r in range(idx.shape[0]):
        rows = idx[r]
        try:
            wf = _fit_window(
                xc[rows], y[rows], t[rows], above[rows],
                {k: v[rows] for k, v in cov.items()}, adjust,
            )
            if design == "fuzzy":
                gap = wf.rates.gap
                if abs(gap) < min_gap:
                    raise WeakDiscontinuity("weak replicate gap")
                points[r] = wf.numerator / gap
            else:
                points[r] = wf.numerator
        except (TooFewPoints, DegenerateDesign, WeakDiscontinuity):
            n_failed += 1
    return points, n_failed


def bootstrap_uncertainty(
    records,
    threshold: ThresholdSpec,
    window: Window,
    design: str,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    *,
    min_gap: float = DEFAULT_MIN_GAP,
    adjust: Sequence[str] | None = None,
) -> BootstrapResult:
    """Nonparametric case-resampling bootstrap within the window.

    Resamples window records with replacement, re-partitions and
    re-estimates; replicates that fail (too-few, degenerate or weak-gap)
    are dropped and counted. Deterministic given the seed, independent of
    worker count.
    """
    if replications < 100:
        raise ValueError("bootstrap needs at least 100 replications")
    if design not in ("sharp", "fuzzy"):
        raise ValueError(f"design must be 'sharp' or 'fuzzy', got {design!r}")
    _check_aligned(threshold, window)
    data = as_dataset(records)
    xc, y, t, above, cov = _window_arrays(data, window)
    m = xc.shape[0]
    if m == 0:
        raise TooFewPoints("window contains no records")
    rng = stream_generator(seed, STREAM_BOOTSTRAP)
    idx = rng.integers(0, m, size=(replications, m), dtype=np.int64)

    if adjust:
        points, n_failed = _bootstrap_python_adjusted(
            xc, y, t, above, cov, idx, design, min_gap, adjust
        )
    else:
        points = np.empty(replications, dtype=np.float64)
        flags = np.empty(replications, dtype=np.int32)
        above_u8 = above.astype(np.uint8)
        workers = backend.worker_count()
        fuzzy = design == "fuzzy"
        if workers <= 1 or replications < 2 * workers:
            backend.kernels.bootstrap_batch(
                xc, y, t, above_u8, idx, fuzzy, min_gap, points, flags
            )
        else:
            bounds = np.linspace(0, replications, workers + 1, dtype=int)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(
                        backend.kernels.bootstrap_batch,
                        xc, y, t, above_u8,
                        idx[lo:hi], fuzzy, min_gap, points[lo:hi], flags[lo:hi],
                    )
                    for lo, hi in zip(bounds[:-1], bounds[1:])
                    if hi > lo
                ]
                for f in futures:
                    f.result()
        n_failed = int((flags != FLAG_OK).sum())

    if n_failed > MAX_FAILED_FRACTION * replications:
        raise BootstrapDegenerate(
            f"{n_failed}/{replications} bootstrap replicates failed "
            f"(> {MAX_FAILED_FRACTION:.0%})"
        )
    ok = points[np.isfinite(points)]
    std_error = float(ok.std(ddof=1))
    ci_low, ci_high = (float(v) for v in np.percentile(ok, [2.5, 97.5]))
    return BootstrapResult(
        std_error=std_error,
        ci_low=ci_low,
        ci_high=ci_high,
        n_failed=n_failed,
        n_replications=replications,
    )


def bandwidth_sweep(
    records,
    threshold: ThresholdSpec,
    bandwidths: Sequence[float],
    design: str,
    *,
    min_gap: float = DEFAULT_MIN_GAP,
    uncertainty: str | None = None,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    adjust: Sequence[str] | None = None,
) -> list[SweepEntry]:
    """One estimate per bandwidth; per-bandwidth failures are captured
    in the entry instead of aborting the sweep."""
    if any(b <= 0 for b in bandwidths):
        raise ValueError("bandwidths must all be > 0")
    data = as_dataset(records)
    if uncertainty is None:
        uncertainty = "bootstrap" if design == "fuzzy" else "delta"
    entries = []
    for bw in bandwidths:
        window = Window(threshold.x0, bw)
        try:
            if design == "sharp":
                est = estimate_sharp(
                    data, threshold, window,
                    uncertainty=uncertainty, replications=replications,
                    seed=seed, adjust=adjust,
                )
            else:
                est = estimate_fuzzy(
                    data, threshold, window, min_gap,
                    uncertainty=uncertainty, replications=replications,
                    seed=seed, adjust=adjust,
                )
            entries.append(SweepEntry(bandwidth=bw, estimate=est))
        except (TooFewPoints, DegenerateDesign, NotSharp, WeakDiscontinuity,
                BootstrapDegenerate) as exc:
            entries.append(
                SweepEntry(bandwidth=bw, error=type(exc).__name__, message=str(exc))
            )
    return entries
