"""Symbolic engine for extended conditional independence.

Parses statements in a small DSL, applies the semi-graphoid rules under
the regime-validity restriction, computes closures, searches for
derivations, and checks statements numerically against explicit discrete
regime families.
"""

from .engine import (
    DEFAULT_MAX_ATOMS,
    Derivation,
    PremiseFile,
    VerificationResult,
    closure,
    derive,
    parse_premise_file,
    verify_derivation,
)
from .rules import FunctionalDependencies, ProofStep, apply_rule
from .semantics import DiscreteModel, holds, statement_violation
from .statements import (
    REGIME_NAME,
    Atom,
    CIStatement,
    VarSet,
    atoms,
    format_varset,
    parse_statement,
    parse_varset,
    regime_atom,
    stochastic,
)

__all__ = [
    "DEFAULT_MAX_ATOMS",
    "Atom",
    "CIStatement",
    "Derivation",
    "DiscreteModel",
    "FunctionalDependencies",
    "PremiseFile",
    "ProofStep",
    "REGIME_NAME",
    "VarSet",
    "VerificationResult",
    "apply_rule",
    "atoms",
    "closure",
    "derive",
    "format_varset",
    "holds",
    "parse_premise_file",
    "parse_statement",
    "parse_varset",
    "regime_atom",
    "statement_violation",
    "stochastic",
    "verify_derivation",
]
