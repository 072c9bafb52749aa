"""Semantic exception hierarchy shared across the toolkit.

Every failure mode a caller is expected to branch on gets its own class;
the CLI maps these to machine-readable error names and exit codes.
"""


class RddKitError(Exception):
    """Base class for all toolkit errors."""


# ---------------------------------------------------------------------------
# estimation


class EstimationError(RddKitError):
    """Base class for estimator failures (CLI exit code 2)."""


class TooFewPoints(EstimationError):
    """A regression side has fewer than two records."""


class DegenerateDesign(EstimationError):
    """Zero variance in the centered assignment values on one side."""


class NotSharp(EstimationError):
    """A within-window record violates T = Z; use the fuzzy estimator."""


class WeakDiscontinuity(EstimationError):
    """|pi_a - pi_b| below min_gap: the Wald denominator is unstable."""


class EmptySide(EstimationError):
    """A window side holds no records where at least one is required."""


class BootstrapDegenerate(EstimationError):
    """More than 20% of bootstrap replicates failed."""


# ---------------------------------------------------------------------------
# balance


class UnknownCovariate(RddKitError):
    """Requested covariate name missing from the dataset."""


class EmptyCell(EstimationError):
    """A (bandwidth, group) balance cell holds zero records."""


# ---------------------------------------------------------------------------
# ci engine


class CiError(RddKitError):
    """Base class for conditional-independence engine errors."""


class CiSyntaxError(CiError):
    """Statement text violates the DSL grammar."""

    def __init__(self, message, position=None, line=None):
        loc = ""
        if line is not None:
            loc += f" (line {line}"
            loc += f", col {position})" if position is not None else ")"
        elif position is not None:
            loc += f" (col {position})"
        super().__init__(message + loc)
        self.position = position
        self.line = line


class ValidityError(CiError):
    """The regime atom would occupy the left-most term of a statement."""


class PatternMismatch(CiError):
    """Rule inputs do not fit the rule's schema."""


class UniverseTooLarge(CiError):
    """Atom universe exceeds the configured cap (combinatorial blow-up)."""


# ---------------------------------------------------------------------------
# ingestion / CLI


class IngestionError(RddKitError):
    """Base class for CSV ingestion failures."""


class FileError(IngestionError):
    """Input file missing or unreadable."""


class SchemaError(IngestionError):
    """Declared columns absent or header malformed."""


class ZMismatch(IngestionError):
    """A supplied z column contradicts derive_z for the declared threshold."""

    def __init__(self, line, z_given, z_derived):
        super().__init__(
            f"line {line}: z column says {z_given} but the threshold derives "
            f"{z_derived}; the declared threshold is inconsistent with the data"
        )
        self.line = line
