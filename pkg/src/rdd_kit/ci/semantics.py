"""Numeric semantics for extended conditional independence.

Checks a statement against an explicit family of discrete joint
distributions, one per regime. A purely stochastic statement must hold as
ordinary conditional independence separately in every regime (conditioning
on the regime atom is the same per-regime reading). A statement with the
regime atom on the right additionally requires a single regime-free
version of the conditional distribution of the left term.

This is the semantic side of the engine's dual route: symbolic
derivations on one side, brute-force distribution checks on the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence, Tuple

import numpy as np

from .statements import Atom, CIStatement

__all__ = ["DiscreteModel", "statement_violation", "holds"]


@dataclass(frozen=True)
class DiscreteModel:
    """Joint pmfs over finite-domain stochastic atoms, one per regime."""

    atoms: Tuple[Atom, ...]
    regimes: Tuple[str, ...]
    pmf: np.ndarray  # shape (len(regimes), d_1, ..., d_k)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=np.float64)
        if pmf.shape[0] != len(self.regimes):
            raise ValueError("pmf's first axis must index regimes")
        if pmf.ndim != len(self.atoms) + 1:
            raise ValueError("pmf needs one axis per atom after the regime axis")
        if np.any(pmf < -1e-12):
            raise ValueError("pmf entries must be nonnegative")
        totals = pmf.reshape(pmf.shape[0], -1).sum(axis=1)
        if not np.allclose(totals, 1.0, atol=1e-9):
            raise ValueError("each regime's pmf must sum to 1")
        if any(a.kind == "regime" for a in self.atoms):
            raise ValueError("model atoms are the stochastic ones; regimes are separate")
        object.__setattr__(self, "pmf", pmf)

    def axis(self, atom: Atom) -> int:
        return self.atoms.index(atom) + 1  # axis 0 is the regime


def _marginal(model: DiscreteModel, keep: Sequence[Atom]) -> np.ndarray:
    """Sum out atoms not in keep; result axes ordered (regime, *keep)."""
    drop = tuple(model.axis(a) for a in model.atoms if a not in keep)
    out = model.pmf.sum(axis=drop) if drop else model.pmf
    kept_order = [a for a in model.atoms if a in keep]
    perm = [0] + [1 + kept_order.index(a) for a in keep]
    return np.transpose(out, perm)


def statement_violation(model: DiscreteModel, statement: CIStatement) -> float:
    """Largest deviation from the statement's defining conditional equalities.

    0.0 means the statement holds exactly in the model; cells of zero
    probability are unconstrained (the definitions hold almost surely).
    """
    regime_in_right = any(a.kind == "regime" for a in statement.right)
    left = sorted(statement.left)
    right = sorted(a for a in statement.right if a.kind != "regime")
    given = sorted(a for a in statement.given if a.kind != "regime")
    for a in left + right + given:
        if a not in model.atoms:
            raise ValueError(f"atom {a.name} not in the model")
    if not left:
        return 0.0  # constants are independent of everything

    joint = _marginal(model, left + right + given)  # (regime, L..., R..., G...)
    nl, nr = len(left), len(right)
    l_shape = joint.shape[1 : 1 + nl]
    r_shape = joint.shape[1 + nl : 1 + nl + nr]
    g_shape = joint.shape[1 + nl + nr :]
    n_regimes = joint.shape[0]
    n_l = int(np.prod(l_shape, dtype=int))

    worst = 0.0
    for g_idx in product(*(range(d) for d in g_shape)):
        if regime_in_right:
            # one regime-free conditional P(L | g) must serve every
            # (regime, r) cell of positive probability
            reference = None
            for sigma in range(n_regimes):
                for r_idx in product(*(range(d) for d in r_shape)):
                    block = joint[(sigma,) + (slice(None),) * nl + r_idx + g_idx]
                    mass = block.sum()
                    if mass <= 0.0:
                        continue
                    cond = block.reshape(-1) / mass
                    if reference is None:
                        reference = cond
                    else:
                        worst = max(worst, float(np.abs(cond - reference).max()))
        else:
            # ordinary conditional independence within each regime
            for sigma in range(n_regimes):
                cell = joint[(sigma,) + (slice(None),) * (nl + nr) + g_idx]
                total = cell.sum()
                if total <= 0.0:
                    continue
                ref = cell.reshape(n_l, -1).sum(axis=1) / total
                for r_idx in product(*(range(d) for d in r_shape)):
                    block = cell[(slice(None),) * nl + r_idx]
                    mass = block.sum()
                    if mass <= 0.0:
                        continue
                    cond = block.reshape(-1) / mass
                    worst = max(worst, float(np.abs(cond - ref).max()))
    return worst


def holds(model: DiscreteModel, statement: CIStatement, tol: float = 1e-9) -> bool:
    return statement_violation(model, statement) <= tol
