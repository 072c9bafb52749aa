"""Statement algebra for extended conditional independence.

A statement ``left _||_ right | given`` asserts that the variables in
``left`` are independent of those in ``right`` once ``given`` is known,
uniformly over the contemplated regimes. One distinguished non-stochastic
atom (named ``Sigma`` by convention) indexes the operating regime; it may
appear in the right or given term but never leftmost. Statements are
stored normalized: the three sets are pairwise disjoint (overlap with the
conditioning set is dropped from the other two, left/right overlap is
weakened into the conditioning set) and the regime atom is kept on the
right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import FrozenSet

from ..errors import CiSyntaxError, ValidityError

__all__ = [
    "Atom",
    "VarSet",
    "CIStatement",
    "REGIME_NAME",
    "atoms",
    "regime_atom",
    "stochastic",
    "format_varset",
    "parse_statement",
    "parse_varset",
]

REGIME_NAME = "Sigma"


@dataclass(frozen=True, order=True)
class Atom:
    """A named variable: stochastic, or the single non-stochastic regime index."""

    name: str
    kind: str = "stochastic"

    def __post_init__(self):
        if self.kind not in ("stochastic", "regime"):
            raise ValueError(f"unknown atom kind {self.kind!r}")

    def __repr__(self):
        return self.name if self.kind == "stochastic" else f"{self.name}*"


VarSet = FrozenSet[Atom]

EMPTY: VarSet = frozenset()


def stochastic(name: str) -> Atom:
    return Atom(name, "stochastic")


def regime_atom(name: str = REGIME_NAME) -> Atom:
    return Atom(name, "regime")


def atoms(*names: str) -> VarSet:
    """Build a VarSet from names; 'Sigma' becomes the regime atom."""
    return frozenset(
        regime_atom(n) if n == REGIME_NAME else stochastic(n) for n in names
    )


def _has_regime(s: VarSet) -> bool:
    return any(a.kind == "regime" for a in s)


def format_varset(s: VarSet) -> str:
    if not s:
        return "0"
    return ", ".join(a.name for a in sorted(s))


@dataclass(frozen=True)
class CIStatement:
    """Normalized extended conditional-independence triple."""

    left: VarSet
    right: VarSet
    given: VarSet

    def __post_init__(self):
        left = frozenset(self.left) - self.given
        right = frozenset(self.right) - self.given
        given = frozenset(self.given)
        overlap = left & right
        if overlap:
            # l _||_ l | g is trivially true once l is conditioned on (P2),
            # so shared atoms weaken into the conditioning set
            given = given | overlap
            left = left - overlap
            right = right - overlap
        if _has_regime(left):
            raise ValidityError(
                "the regime atom may not appear in the left term of a statement"
            )
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "given", given)

    @property
    def atoms(self) -> VarSet:
        return self.left | self.right | self.given

    def sort_key(self):
        return (
            tuple(sorted(a.name for a in self.left)),
            tuple(sorted(a.name for a in self.right)),
            tuple(sorted(a.name for a in self.given)),
        )

    def __str__(self):
        text = f"{format_varset(self.left)} _||_ {format_varset(self.right)}"
        if self.given:
            text += f" | {format_varset(self.given)}"
        return text

    def __repr__(self):
        return f"<{self}>"


_TOKEN_RE = re.compile(r"(_\|\|_|\||,|[A-Za-z_][A-Za-z0-9_]*|0)")


def _tokenize(text: str, line: int | None = None):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CiSyntaxError(
                f"unexpected character {text[pos]!r}", position=pos + 1, line=line
            )
        tokens.append((m.group(1), pos + 1))
        pos = m.end()
    return tokens


def _parse_varlist(tokens, i, what, text_len, line):
    """Parse a comma/space separated identifier list or the empty-set mark 0."""
    names = []
    if i < len(tokens) and tokens[i][0] == "0":
        return [], i + 1
    expect_name = True
    while i < len(tokens):
        tok, pos = tokens[i]
        if tok in ("_||_", "|"):
            break
        if tok == ",":
            if expect_name:
                raise CiSyntaxError("misplaced comma", position=pos, line=line)
            expect_name = True
            i += 1
            continue
        if tok == "0":
            raise CiSyntaxError(
                "'0' denotes the empty set and cannot be mixed with names",
                position=pos,
                line=line,
            )
        names.append(tok)
        expect_name = False
        i += 1
    if not names:
        pos = tokens[i][1] if i < len(tokens) else text_len + 1
        raise CiSyntaxError(f"expected {what}", position=pos, line=line)
    return names, i


def parse_varset(text: str, line: int | None = None) -> VarSet:
    tokens = _tokenize(text, line)
    names, i = _parse_varlist(tokens, 0, "a variable list", len(text), line)
    if i != len(tokens):
        raise CiSyntaxError(
            f"unexpected token {tokens[i][0]!r}", position=tokens[i][1], line=line
        )
    return atoms(*names)


def parse_statement(text: str, line: int | None = None) -> CIStatement:
    """Parse ``varlist _||_ varlist [| varlist]`` into a normalized statement.

    Raises CiSyntaxError on grammar violations (with 1-based position) and
    ValidityError if the regime atom appears in the left term.
    """
    tokens = _tokenize(text, line)
    i = 0
    left_names, i = _parse_varlist(tokens, i, "a variable list", len(text), line)
    if i >= len(tokens) or tokens[i][0] != "_||_":
        pos = tokens[i][1] if i < len(tokens) else len(text) + 1
        raise CiSyntaxError("expected '_||_'", position=pos, line=line)
    i += 1
    right_names, i = _parse_varlist(tokens, i, "a variable list", len(text), line)
    given_names: list[str] = []
    if i < len(tokens) and tokens[i][0] == "|":
        i += 1
        given_names, i = _parse_varlist(tokens, i, "a conditioning list", len(text), line)
    if i != len(tokens):
        raise CiSyntaxError(
            f"unexpected token {tokens[i][0]!r}", position=tokens[i][1], line=line
        )
    if REGIME_NAME in left_names:
        raise ValidityError(
            "the regime atom may not appear in the left term of a statement"
        )
    return CIStatement(atoms(*left_names), atoms(*right_names), atoms(*given_names))
