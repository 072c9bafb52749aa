"""The five semi-graphoid inference rules over normalized statements.

Rules are applied in storage orientation (regime atom kept on the right).
Because symmetry (P1) is barred from moving the regime atom leftmost, the
decomposition (P3), weak-union (P4) and contraction (P5) rules accept the
mirrored orientation as well: a witness may be a function of either the
right or the left term, and contraction may share the right term instead
of the left. For purely stochastic statements the mirrored forms are
exactly P1-conjugates; for regime-bearing statements they stand in for
the transient swapped forms proofs would otherwise need.

``W is a function of Y`` is realized as set containment, extended by any
declared functional dependencies (``Z <= X`` lines in premise files).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

from ..errors import PatternMismatch, ValidityError
from .statements import Atom, CIStatement, VarSet, format_varset

__all__ = ["RULE_NAMES", "FunctionalDependencies", "ProofStep", "apply_rule"]

RULE_NAMES = ("P1", "P2", "P3", "P4", "P5")


class FunctionalDependencies:
    """Declared determinism facts: atom <= varset ("atom is a function of")."""

    def __init__(self, declarations: Iterable[Tuple[Atom, VarSet]] = ()):
        self._rules: list[Tuple[Atom, VarSet]] = []
        for target, source in declarations:
            if target.kind == "regime":
                raise ValidityError("the regime atom cannot be declared a function")
            self._rules.append((target, frozenset(source)))

    def __bool__(self) -> bool:
        return bool(self._rules)

    @property
    def declarations(self) -> tuple[Tuple[Atom, VarSet], ...]:
        return tuple(self._rules)

    @property
    def atoms(self) -> VarSet:
        out = set()
        for target, source in self._rules:
            out.add(target)
            out |= source
        return frozenset(out)

    def expand(self, s: VarSet) -> VarSet:
        """Close a varset under the declared dependencies."""
        current = set(s)
        changed = True
        while changed:
            changed = False
            for target, source in self._rules:
                if target not in current and source and source <= current:
                    current.add(target)
                    changed = True
        return frozenset(current)

    def determines(self, w: VarSet, s: VarSet) -> bool:
        """True iff w is a function of s (subset of the dependency closure)."""
        return w <= self.expand(s)


NO_DEPS = FunctionalDependencies()


@dataclass(frozen=True)
class ProofStep:
    """One derivation step: a rule, its input step indices and its output."""

    rule: str  # "P1".."P5" or "Premise"
    inputs: Tuple[int, ...]
    output: CIStatement
    function_witness: Optional[VarSet] = None

    def render(self, index: int) -> str:
        refs = ",".join(str(j + 1) for j in self.inputs)
        head = self.rule if not refs else f"{self.rule} [{refs}]"
        if self.function_witness is not None:
            head += f" W={{{format_varset(self.function_witness)}}}"
        return f"{index + 1:3d}  {head:<24s} {self.output}"


def _p1(stmt: CIStatement) -> CIStatement:
    if any(a.kind == "regime" for a in stmt.right):
        raise ValidityError(
            "P1 would move the regime atom into the left term; regime-bearing "
            "statements keep the regime on the right (symmetry is implicit)"
        )
    return CIStatement(stmt.right, stmt.left, stmt.given)


def _p2(x: VarSet, y: VarSet) -> CIStatement:
    if any(a.kind == "regime" for a in x):
        raise ValidityError("P2's left/conditioning set cannot contain the regime atom")
    return CIStatement(x, y, x)


def _p3(stmt: CIStatement, w: VarSet, deps: FunctionalDependencies) -> CIStatement:
    if deps.determines(w, stmt.right):
        return CIStatement(stmt.left, w, stmt.given)
    if deps.determines(w, stmt.left):
        return CIStatement(w, stmt.right, stmt.given)
    raise PatternMismatch(
        f"P3 witness {{{format_varset(w)}}} is not a function of either term"
    )


def _p4(stmt: CIStatement, w: VarSet, deps: FunctionalDependencies) -> CIStatement:
    if not (deps.determines(w, stmt.right) or deps.determines(w, stmt.left)):
        raise PatternMismatch(
            f"P4 witness {{{format_varset(w)}}} is not a function of either term"
        )
    return CIStatement(stmt.left, stmt.right, stmt.given | w)


def _p5(first: CIStatement, second: CIStatement) -> CIStatement:
    # contraction: L _||_ Y | G  and  L _||_ W | (Y,G)  =>  L _||_ (Y,W) | G
    if first.left == second.left and second.given == first.right | first.given:
        return CIStatement(first.left, first.right | second.right, first.given)
    # mirrored on a shared right term (regime-bearing statements)
    if first.right == second.right and second.given == first.left | first.given:
        return CIStatement(first.left | second.left, first.right, first.given)
    raise PatternMismatch("P5 inputs do not fit the contraction pattern")


def apply_rule(
    rule: str,
    inputs: Sequence[CIStatement],
    witness=None,
    dependencies: FunctionalDependencies = NO_DEPS,
) -> CIStatement:
    """Apply one named rule and return its normalized conclusion.

    ``witness`` is the function witness W for P3/P4 (a varset) or the
    (X, Y) pair for the P2 schema. Raises PatternMismatch when the inputs
    do not fit the rule and ValidityError when the conclusion would place
    the regime atom leftmost.
    """
    arity = {"P1": 1, "P2": 0, "P3": 1, "P4": 1, "P5": 2}
    if rule not in arity:
        raise PatternMismatch(f"unknown rule {rule!r}")
    if len(inputs) != arity[rule]:
        raise PatternMismatch(
            f"{rule} expects {arity[rule]} input statement(s), got {len(inputs)}"
        )
    if rule == "P1":
        return _p1(inputs[0])
    if rule == "P2":
        if witness is None or len(witness) != 2:
            raise PatternMismatch("P2 needs a witness pair (X, Y) of varsets")
        x, y = witness
        return _p2(frozenset(x), frozenset(y))
    if rule == "P3":
        if witness is None:
            raise PatternMismatch("P3 needs a function witness W")
        return _p3(inputs[0], frozenset(witness), dependencies)
    if rule == "P4":
        if witness is None:
            raise PatternMismatch("P4 needs a function witness W")
        return _p4(inputs[0], frozenset(witness), dependencies)
    return _p5(inputs[0], inputs[1])
