"""rdd-kit: regression-discontinuity causal effect estimation.

Sharp and fuzzy estimators of the average causal effect at a treatment
threshold, covariate-balance diagnostics, a ground-truth simulator with
interventional regimes, and a symbolic engine for extended
conditional-independence derivations.
"""

from . import ci
from .backend import backend_name
from .balance import BalanceRow, summarize_balance
from .core import (
    AceEstimate,
    Dataset,
    ObservationRecord,
    RegimeTag,
    ThresholdSpec,
    Window,
    as_dataset,
    derive_z,
    partition_window,
)
from .dataio import IngestionReport, IngestionSchema, ingest_csv, render_dataset_csv
from .errors import (
    BootstrapDegenerate,
    DegenerateDesign,
    EmptyCell,
    EmptySide,
    EstimationError,
    NotSharp,
    RddKitError,
    TooFewPoints,
    UnknownCovariate,
    WeakDiscontinuity,
    ZMismatch,
)
from .estimation import (
    BootstrapResult,
    ComplianceRates,
    LinearFit,
    SweepEntry,
    bandwidth_sweep,
    bootstrap_uncertainty,
    compliance_rates,
    estimate_fuzzy,
    estimate_sharp,
    fit_local_linear,
)
from .simulator import (
    ScenarioConfig,
    StudyReport,
    generate,
    monte_carlo_study,
    parse_scenario,
    render_scenario,
    true_ace,
)

__version__ = "0.1.0"

__all__ = [
    "AceEstimate",
    "BalanceRow",
    "BootstrapDegenerate",
    "BootstrapResult",
    "ComplianceRates",
    "Dataset",
    "DegenerateDesign",
    "EmptyCell",
    "EmptySide",
    "EstimationError",
    "IngestionReport",
    "IngestionSchema",
    "LinearFit",
    "NotSharp",
    "ObservationRecord",
    "RddKitError",
    "RegimeTag",
    "ScenarioConfig",
    "StudyReport",
    "SweepEntry",
    "ThresholdSpec",
    "TooFewPoints",
    "UnknownCovariate",
    "WeakDiscontinuity",
    "Window",
    "ZMismatch",
    "as_dataset",
    "backend_name",
    "bandwidth_sweep",
    "bootstrap_uncertainty",
    "ci",
    "compliance_rates",
    "derive_z",
    "estimate_fuzzy",
    "estimate_sharp",
    "fit_local_linear",
    "generate",
    "ingest_csv",
    "monte_carlo_study",
    "parse_scenario",
    "partition_window",
    "render_dataset_csv",
    "render_scenario",
    "summarize_balance",
    "true_ace",
    "__version__",
]
