"""Synthetic scenario generator with interventional ground truth.

A scenario draws a latent confounder C and an assignment X identically in
every regime, forces or observes the treatment according to the regime
tag, and produces the outcome from one regime-free law:

    Y = g(X) + tau * T + confounder_effect * C + noise

with g a polynomial (continuous everywhere, so the continuity conditions
hold by construction unless a violation jump is explicitly requested).
Because each variable draws from its own counter-based stream, the
covariate columns and the outcome-given-(C, X, T) values are bit-identical
across regimes under a shared seed, which turns the sufficiency
assumptions the estimators rely on into executable invariants. The true
average causal effect at the threshold is tau by construction.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from . import backend
from .core import Dataset, RegimeTag, ThresholdSpec, Window
from .errors import EstimationError
from .estimation import estimate_fuzzy, estimate_sharp
from .rng import (
    STREAM_ASSIGNMENT,
    STREAM_COMPLIANCE,
    STREAM_CONFOUNDER,
    STREAM_NOISE,
    repetition_seed,
    stream_generator,
)

__all__ = [
    "ScenarioConfig",
    "StudyReport",
    "generate",
    "true_ace",
    "monte_carlo_study",
    "parse_scenario",
    "render_scenario",
    "CONFOUNDER_COLUMN",
]

CONFOUNDER_COLUMN = "c"


@dataclass(frozen=True)
class ScenarioConfig:
    """Simulator recipe with a known true effect tau at the threshold."""

    n: int
    x0: float
    tau: float
    design: str  # "sharp" | "fuzzy"
    baseline: Tuple[float, ...] = (0.0,)  # polynomial coefficients, ascending
    confounder_effect: float = 0.0
    compliance_steepness: float = 2.0
    noise_sd: float = 0.0
    assignment_law: str = "uniform"  # "uniform" | "beta"
    beta_a: float = 2.0
    beta_b: float = 2.0
    seed: int = 0
    censor_confounder: bool = False
    continuity_violation: float = 0.0  # explicit jump in g at x0 (stress only)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if self.design not in ("sharp", "fuzzy"):
            raise ValueError(f"design must be 'sharp' or 'fuzzy', got {self.design!r}")
        if self.design == "fuzzy":
            if not (math.isfinite(self.compliance_steepness) and self.compliance_steepness > 0):
                raise ValueError("fuzzy designs need compliance_steepness finite and > 0")
        if self.assignment_law not in ("uniform", "beta"):
            raise ValueError(f"unknown assignment law {self.assignment_law!r}")
        if self.assignment_law == "beta" and (self.beta_a <= 0 or self.beta_b <= 0):
            raise ValueError("beta law parameters must be > 0")
        object.__setattr__(self, "baseline", tuple(float(b) for b in self.baseline))


def _draw_shared(config: ScenarioConfig):
    """(C, X) draws, identical in every regime under the config's seed."""
    c = stream_generator(config.seed, STREAM_CONFOUNDER).standard_normal(config.n)
    rng_x = stream_generator(config.seed, STREAM_ASSIGNMENT)
    if config.assignment_law == "uniform":
        x = rng_x.random(config.n)
    else:
        x = rng_x.beta(config.beta_a, config.beta_b, config.n)
    return c, x


def generate(config: ScenarioConfig, regime: RegimeTag) -> Dataset:
    """Generate one dataset under the given operating regime."""
    c, x = _draw_shared(config)
    z = (x >= config.x0).astype(np.int64)
    if regime is RegimeTag.INTERVENE_CONTROL:
        t = np.zeros(config.n, dtype=np.int64)
    elif regime is RegimeTag.INTERVENE_TREAT:
        t = np.ones(config.n, dtype=np.int64)
    elif regime is RegimeTag.OBSERVATIONAL_SHARP:
        t = z.copy()
    else:
        p = expit(
            config.compliance_steepness * (2 * z - 1)
            + config.confounder_effect * c
        )
        u = stream_generator(config.seed, STREAM_COMPLIANCE).random(config.n)
        t = (u < p).astype(np.int64)

    noise = stream_generator(config.seed, STREAM_NOISE).standard_normal(config.n)
    y = (
        np.polynomial.polynomial.polyval(x, config.baseline)
        + config.continuity_violation * z
        + config.tau * t
        + config.confounder_effect * c
        + config.noise_sd * noise
    )
    covariates = {} if config.censor_confounder else {CONFOUNDER_COLUMN: c}
    return Dataset(
        assignment=x, outcome=y, treatment=t, covariates=covariates, regime=regime
    )


def true_ace(config: ScenarioConfig) -> float:
    """The interventional contrast at the threshold.

    E_1(Y | X=x0) - E_0(Y | X=x0) = tau exactly: the baseline and the
    confounder terms are shared by both interventional regimes and cancel.
    """
    return float(config.tau)


@dataclass(frozen=True)
class StudyReport:
    """Monte Carlo summary of an estimator against the scenario's truth."""

    estimator: str
    true_effect: float
    n_repetitions: int
    n_failed: int
    bias: float
    rmse: float
    coverage: Optional[float]
    mean_point: float
    sd_point: float
    failures: Tuple[Tuple[int, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "true_effect": self.true_effect,
            "n_repetitions": self.n_repetitions,
            "n_failed": self.n_failed,
            "bias": self.bias,
            "rmse": self.rmse,
            "coverage": self.coverage,
            "mean_point": self.mean_point,
            "sd_point": self.sd_point,
            "failures": [list(f) for f in self.failures],
        }


def _observational_regime(config: ScenarioConfig) -> RegimeTag:
    return (
        RegimeTag.OBSERVATIONAL_SHARP
        if config.design == "sharp"
        else RegimeTag.OBSERVATIONAL_FUZZY
    )


def monte_carlo_study(
    config: ScenarioConfig,
    estimator: str,
    repetitions: int,
    window: Window,
    base_seed: int = 0,
    *,
    uncertainty: str = "bootstrap",
    replications: int = 400,
    min_gap: float = 0.05,
) -> StudyReport:
    """Repeat generate-then-estimate with derived per-repetition seeds.

    Reports bias and RMSE against the scenario's true effect, plus CI
    coverage when the uncertainty method produces intervals. Estimator
    failures are recorded per repetition; the study only fails if every
    repetition does.
    """
    if repetitions < 10:
        raise ValueError("a study needs at least 10 repetitions")
    if estimator not in ("sharp", "fuzzy"):
        raise ValueError(f"estimator must be 'sharp' or 'fuzzy', got {estimator!r}")
    threshold = ThresholdSpec(config.x0)
    regime = _observational_regime(config)
    tau = true_ace(config)

    def one(rep: int):
        seed = repetition_seed(base_seed, rep)
        data = generate(replace(config, seed=seed), regime)
        if estimator == "sharp":
            return estimate_sharp(
                data, threshold, window,
                uncertainty=uncertainty, replications=replications, seed=seed,
            )
        return estimate_fuzzy(
            data, threshold, window, min_gap,
            uncertainty=uncertainty, replications=replications, seed=seed,
        )

    results: list = [None] * repetitions
    workers = backend.worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(one, rep): rep for rep in range(repetitions)}
            for fut, rep in futures.items():
                try:
                    results[rep] = fut.result()
                except EstimationError as exc:
                    results[rep] = exc
    else:
        for rep in range(repetitions):
            try:
                results[rep] = one(rep)
            except EstimationError as exc:
                results[rep] = exc

    points, covered, with_ci, failures = [], 0, 0, []
    for rep, res in enumerate(results):
        if isinstance(res, EstimationError):
            failures.append((rep, type(res).__name__))
            continue
        points.append(res.point)
        if res.ci_low is not None:
            with_ci += 1
            if res.ci_low <= tau <= res.ci_high:
                covered += 1
    if not points:
        raise EstimationError(
            f"all {repetitions} repetitions failed; first: {failures[0][1]}"
        )
    pts = np.asarray(points)
    return StudyReport(
        estimator=estimator,
        true_effect=tau,
        n_repetitions=repetitions,
        n_failed=len(failures),
        bias=float(pts.mean() - tau),
        rmse=float(np.sqrt(np.mean((pts - tau) ** 2))),
        coverage=(covered / with_ci) if with_ci else None,
        mean_point=float(pts.mean()),
        sd_point=float(pts.std(ddof=1)) if len(pts) > 1 else 0.0,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# scenario files: flat key = value lines, # comments

_BETA_RE = re.compile(r"^beta\(\s*([^,]+)\s*,\s*([^)]+)\s*\)$")

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def parse_scenario(text: str) -> ScenarioConfig:
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"scenario line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        fields[key] = (value, lineno)

    def take(key, convert, default=None, required=False):
        if key not in fields:
            if required:
                raise ValueError(f"scenario is missing required key {key!r}")
            return default
        value, lineno = fields.pop(key)
        try:
            return convert(value)
        except ValueError as exc:
            raise ValueError(f"scenario line {lineno}: bad value for {key}: {exc}")

    def as_bool(v):
        if v.lower() not in _BOOL:
            raise ValueError(f"expected a boolean, got {v!r}")
        return _BOOL[v.lower()]

    def as_poly(v):
        return tuple(float(p) for p in re.split(r"[,\s]+", v.strip()) if p)

    n = take("n", int, required=True)
    x0 = take("x0", float, required=True)
    tau = take("tau", float, required=True)
    design = take("design", str, required=True)
    baseline = take("baseline", as_poly, default=(0.0,))
    confounder_effect = take("confounder_effect", float, default=0.0)
    compliance_steepness = take("compliance_steepness", float, default=2.0)
    noise_sd = take("noise_sd", float, default=0.0)
    seed = take("seed", int, default=0)
    censor = take("censor_confounder", as_bool, default=False)
    violation = take("continuity_violation", float, default=0.0)

    law_raw = take("assignment_law", str, default="uniform")
    beta_a, beta_b = 2.0, 2.0
    law = law_raw
    m = _BETA_RE.match(law_raw) if law_raw else None
    if m:
        law = "beta"
        beta_a, beta_b = float(m.group(1)), float(m.group(2))

    if fields:
        unknown = ", ".join(sorted(fields))
        raise ValueError(f"unknown scenario keys: {unknown}")
    return ScenarioConfig(
        n=n, x0=x0, tau=tau, design=design, baseline=baseline,
        confounder_effect=confounder_effect,
        compliance_steepness=compliance_steepness, noise_sd=noise_sd,
        assignment_law=law, beta_a=beta_a, beta_b=beta_b, seed=seed,
        censor_confounder=censor, continuity_violation=violation,
    )


def render_scenario(config: ScenarioConfig) -> str:
    law = (
        "uniform"
        if config.assignment_law == "uniform"
        else f"beta({config.beta_a}, {config.beta_b})"
    )
    lines = [
        f"n = {config.n}",
        f"x0 = {config.x0!r}",
        f"tau = {config.tau!r}",
        f"design = {config.design}",
        "baseline = " + ", ".join(repr(b) for b in config.baseline),
        f"confounder_effect = {config.confounder_effect!r}",
        f"compliance_steepness = {config.compliance_steepness!r}",
        f"noise_sd = {config.noise_sd!r}",
        f"assignment_law = {law}",
        f"seed = {config.seed}",
        f"censor_confounder = {str(config.censor_confounder).lower()}",
        f"continuity_violation = {config.continuity_violation!r}",
    ]
    return "\n".join(lines) + "\n"
