"""Closure computation, breadth-first proof search and proof checking.

The closure is the least fixed point of the five rules over a finite atom
universe, seeded with the premises and every (generalized) P2 instance,
and restricted so the regime atom never reaches the left term. Proof
search is a breadth-first sweep over the same derivation DAG: statements
are discovered at their minimal depth, ties broken by canonical statement
order, so derivations are minimal and reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, Optional, Tuple

from ..errors import PatternMismatch, UniverseTooLarge, ValidityError
from .rules import NO_DEPS, FunctionalDependencies, ProofStep, apply_rule
from .statements import (
    REGIME_NAME,
    Atom,
    CIStatement,
    VarSet,
    parse_statement,
    parse_varset,
)

__all__ = [
    "DEFAULT_MAX_ATOMS",
    "Derivation",
    "VerificationResult",
    "closure",
    "derive",
    "verify_derivation",
    "PremiseFile",
    "parse_premise_file",
]

DEFAULT_MAX_ATOMS = 8


def _subsets(s: VarSet):
    items = sorted(s)
    for r in range(len(items) + 1):
        for combo in combinations(items, r):
            yield frozenset(combo)


def _has_regime(s: VarSet) -> bool:
    return any(a.kind == "regime" for a in s)


def _check_universe(universe: VarSet, max_atoms: int) -> None:
    if len(universe) > max_atoms:
        raise UniverseTooLarge(
            f"universe has {len(universe)} atoms, cap is {max_atoms}"
        )
    regimes = [a for a in universe if a.kind == "regime"]
    if len(regimes) > 1:
        raise ValidityError("at most one regime atom may exist per problem")


def _p2_instances(universe: VarSet, deps: FunctionalDependencies):
    """All normalized P2-schema statements over the universe.

    After normalization these are the statements whose left term is a
    function of the conditioning set (empty left in the absence of
    functional-dependency declarations).
    """
    for given in _subsets(universe):
        determined = (deps.expand(given) & universe) - given
        rest = universe - given
        for left in _subsets(determined):
            for right in _subsets(rest - left):
                yield CIStatement(left, right, given)


class _Saturator:
    """Shared worker behind closure() and derive()."""

    def __init__(
        self,
        premises: Iterable[CIStatement],
        universe: VarSet,
        deps: FunctionalDependencies,
        max_atoms: int,
    ):
        _check_universe(universe, max_atoms)
        self.universe = universe
        self.deps = deps
        self.known: set[CIStatement] = set()
        self.parents: Dict[CIStatement, tuple] = {}
        # contraction partner indexes, keyed both ways for each orientation
        self.by_left_given: Dict[tuple, list] = {}
        self.by_left_rg: Dict[tuple, list] = {}
        self.by_right_given: Dict[tuple, list] = {}
        self.by_right_lg: Dict[tuple, list] = {}

        seeds = []
        for p in premises:
            if not p.atoms <= universe:
                missing = ", ".join(sorted(a.name for a in p.atoms - universe))
                raise ValueError(f"premise {p} mentions atoms outside the universe: {missing}")
            seeds.append((p, ("Premise", (), None)))
        for s in _p2_instances(universe, deps):
            seeds.append((s, ("P2", (), None)))
        self.frontier: list[CIStatement] = []
        for stmt, parent in seeds:
            if stmt not in self.known:
                self.known.add(stmt)
                self.parents[stmt] = parent
                self.frontier.append(stmt)
        self.frontier.sort(key=CIStatement.sort_key)
        for stmt in self.frontier:
            self._index(stmt)

    def _index(self, s: CIStatement) -> None:
        self.by_left_given.setdefault((s.left, s.given), []).append(s)
        self.by_left_rg.setdefault((s.left, s.right | s.given), []).append(s)
        self.by_right_given.setdefault((s.right, s.given), []).append(s)
        self.by_right_lg.setdefault((s.right, s.left | s.given), []).append(s)

    def _unary(self, s: CIStatement):
        if not _has_regime(s.right):
            yield CIStatement(s.right, s.left, s.given), ("P1", (s,), None)
        for w in _subsets(self.deps.expand(s.right) & self.universe):
            yield CIStatement(s.left, w, s.given), ("P3", (s,), w)
            yield CIStatement(s.left, s.right, s.given | w), ("P4", (s,), w)
        for w in _subsets(self.deps.expand(s.left) & self.universe):
            yield CIStatement(w, s.right, s.given), ("P3", (s,), w)
            yield CIStatement(s.left, s.right, s.given | w), ("P4", (s,), w)

    def _binary(self, s: CIStatement):
        # s as first input, standard orientation: s=(L,Y,G), partner=(L,W,Y|G)
        for p in self.by_left_given.get((s.left, s.right | s.given), ()):
            yield CIStatement(s.left, s.right | p.right, s.given), ("P5", (s, p), None)
        # s as second input: partner=(L,Y,G) with Y|G == s.given
        for p in self.by_left_rg.get((s.left, s.given), ()):
            yield CIStatement(p.left, p.right | s.right, p.given), ("P5", (p, s), None)
        # mirrored (shared right term)
        for p in self.by_right_given.get((s.right, s.left | s.given), ()):
            yield CIStatement(s.left | p.left, s.right, s.given), ("P5", (s, p), None)
        for p in self.by_right_lg.get((s.right, s.given), ()):
            yield CIStatement(p.left | s.left, p.right, p.given), ("P5", (p, s), None)

    def run(self, target: Optional[CIStatement] = None) -> bool:
        """Saturate to the fixed point; stop early if target is reached."""
        if target is not None and target in self.known:
            return True
        while self.frontier:
            discovered: Dict[CIStatement, tuple] = {}
            for s in self.frontier:
                for out, parent in self._unary(s):
                    if out not in self.known and out not in discovered:
                        discovered[out] = parent
                for out, parent in self._binary(s):
                    if out not in self.known and out not in discovered:
                        discovered[out] = parent
            self.frontier = sorted(discovered, key=CIStatement.sort_key)
            for stmt in self.frontier:
                self.known.add(stmt)
                self.parents[stmt] = discovered[stmt]
                self._index(stmt)
            if target is not None and target in self.known:
                return True
        return target in self.known if target is not None else False


def _universe_of(
    premises: Iterable[CIStatement],
    deps: FunctionalDependencies,
    extra: Iterable[Atom] = (),
) -> VarSet:
    atoms: set[Atom] = set(extra)
    for p in premises:
        atoms |= p.atoms
    atoms |= deps.atoms
    return frozenset(atoms)


def closure(
    premises: Iterable[CIStatement],
    atom_universe: Optional[VarSet] = None,
    *,
    dependencies: FunctionalDependencies = NO_DEPS,
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> frozenset:
    """Least fixed point of the rules over the universe, premises included."""
    premises = list(premises)
    universe = (
        frozenset(atom_universe)
        if atom_universe is not None
        else _universe_of(premises, dependencies)
    )
    sat = _Saturator(premises, universe, dependencies, max_atoms)
    sat.run()
    return frozenset(sat.known)


@dataclass(frozen=True)
class Derivation:
    """A verified-checkable proof: premises, steps and the target they reach."""

    steps: Tuple[ProofStep, ...]
    premises: Tuple[CIStatement, ...]
    target: CIStatement
    dependencies: FunctionalDependencies = NO_DEPS

    def render(self) -> str:
        return "\n".join(step.render(i) for i, step in enumerate(self.steps))

    def to_dict(self) -> dict:
        return {
            "target": str(self.target),
            "premises": [str(p) for p in self.premises],
            "dependencies": [
                f"{t.name} <= {', '.join(sorted(a.name for a in src))}"
                for t, src in self.dependencies.declarations
            ],
            "steps": [
                {
                    "index": i,
                    "rule": s.rule,
                    "inputs": list(s.inputs),
                    "statement": str(s.output),
                    "function_witness": (
                        sorted(a.name for a in s.function_witness)
                        if s.function_witness is not None
                        else None
                    ),
                }
                for i, s in enumerate(self.steps)
            ],
        }


def derive(
    premises: Iterable[CIStatement],
    target: CIStatement,
    *,
    dependencies: FunctionalDependencies = NO_DEPS,
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> Optional[Derivation]:
    """Breadth-first search for a minimal derivation of target.

    Returns None when the target is not in the closure of the premises
    under the engine's rule set (which is not a semantic refutation).
    """
    premises = list(dict.fromkeys(premises))
    universe = _universe_of(premises, dependencies, extra=target.atoms)
    sat = _Saturator(premises, universe, dependencies, max_atoms)
    if not sat.run(target):
        return None

    steps: list[ProofStep] = []
    index_of: Dict[CIStatement, int] = {}

    def build(stmt: CIStatement) -> int:
        if stmt in index_of:
            return index_of[stmt]
        rule, inputs, witness = sat.parents[stmt]
        input_idx = tuple(build(s) for s in inputs)
        idx = len(steps)
        steps.append(
            ProofStep(rule=rule, inputs=input_idx, output=stmt, function_witness=witness)
        )
        index_of[stmt] = idx
        return idx

    build(target)
    return Derivation(
        steps=tuple(steps),
        premises=tuple(premises),
        target=target,
        dependencies=dependencies,
    )


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    failed_index: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def verify_derivation(derivation: Derivation) -> VerificationResult:
    """Re-check every step against apply_rule and the declared premises."""
    premise_set = set(derivation.premises)
    deps = derivation.dependencies
    for i, step in enumerate(derivation.steps):
        if any(j >= i for j in step.inputs):
            return VerificationResult(False, i, "step references a later step")
        inputs = [derivation.steps[j].output for j in step.inputs]
        if step.rule == "Premise":
            if step.inputs or step.output not in premise_set:
                return VerificationResult(False, i, "not a declared premise")
            continue
        if step.rule == "P2":
            if step.inputs or not deps.determines(step.output.left, step.output.given):
                return VerificationResult(False, i, "not a P2-schema instance")
            continue
        try:
            produced = apply_rule(
                step.rule, inputs, witness=step.function_witness, dependencies=deps
            )
        except (PatternMismatch, ValidityError) as exc:
            return VerificationResult(False, i, str(exc))
        if produced != step.output:
            return VerificationResult(False, i, "rule output differs from claim")
    if not derivation.steps or derivation.steps[-1].output != derivation.target:
        return VerificationResult(
            False, len(derivation.steps), "derivation does not conclude with the target"
        )
    return VerificationResult(True)


@dataclass(frozen=True)
class PremiseFile:
    """Parsed premise file: statements plus functional-dependency lines."""

    statements: Tuple[CIStatement, ...]
    dependencies: FunctionalDependencies = NO_DEPS

    @property
    def universe(self) -> VarSet:
        return _universe_of(self.statements, self.dependencies)


_DEP_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*<=\s*(.+)$")


def parse_premise_file(text: str) -> PremiseFile:
    """Parse the premise DSL: one statement per line, # comments,
    functional-dependency lines of the form ``Z <= X``."""
    statements: list[CIStatement] = []
    declarations: list[Tuple[Atom, VarSet]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DEP_RE.match(line)
        if m is not None:
            target_name, source_text = m.groups()
            if target_name == REGIME_NAME:
                raise ValidityError(
                    f"line {lineno}: the regime atom cannot be declared a function"
                )
            source = parse_varset(source_text, line=lineno)
            if _has_regime(source):
                raise ValidityError(
                    f"line {lineno}: the regime atom cannot determine a variable"
                )
            declarations.append((Atom(target_name), source))
            continue
        statements.append(parse_statement(line, line=lineno))
    return PremiseFile(
        statements=tuple(statements),
        dependencies=FunctionalDependencies(declarations),
    )
