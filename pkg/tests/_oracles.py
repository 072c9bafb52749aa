"""Independent oracles the package code is checked against.

Everything here is deliberately written without reusing package
internals: the OLS oracle solves the raw normal equations, and the
closure oracle is a naive repeated-scan fixed point over plain
name-tuples. Keep it that way — these are the second route of the
dual-route checks.
"""

from itertools import chain, combinations

import numpy as np

SIGMA = "Sigma"


def ols_normal_equations(x, y):
    """(intercept, slope, intercept_se, residual_variance) via X'X b = X'y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    design = np.column_stack([np.ones(x.shape[0]), x])
    gram = design.T @ design
    beta = np.linalg.solve(gram, design.T @ y)
    resid = y - design @ beta
    dof = x.shape[0] - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(gram)
    return float(beta[0]), float(beta[1]), float(np.sqrt(max(cov[0, 0], 0.0))), s2


# ---------------------------------------------------------------------------
# brute-force semi-graphoid closure over name triples


def _powerset(items):
    items = sorted(items)
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


def _norm(left, right, given):
    left, right, given = set(left), set(right), set(given)
    left -= given
    right -= given
    overlap = left & right
    given |= overlap
    left -= overlap
    right -= overlap
    if SIGMA in left:
        raise AssertionError("oracle produced a Sigma-left statement")
    return (frozenset(left), frozenset(right), frozenset(given))


def _expand(names, deps):
    current = set(names)
    changed = True
    while changed:
        changed = False
        for target, sources in deps.items():
            if target not in current and sources and set(sources) <= current:
                current.add(target)
                changed = True
    return frozenset(current)


def brute_force_closure(premises, universe, deps=None):
    """Naive fixed point of P1-P5 (both orientations) with P2 seeding.

    premises: iterable of (left, right, given) name-iterables;
    universe: iterable of names (may include 'Sigma');
    deps: {target_name: set-of-source-names} functional declarations.
    """
    deps = dict(deps or {})
    universe = frozenset(universe)
    stmts = set()
    for given in _powerset(universe):
        given = frozenset(given)
        determined = (_expand(given, deps) & universe) - given
        for left in _powerset(determined):
            left = frozenset(left)
            for right in _powerset(universe - given - left):
                stmts.add(_norm(left, right, given))
    for p in premises:
        stmts.add(_norm(*p))

    changed = True
    while changed:
        changed = False
        new = set()
        for (l, r, g) in stmts:
            if SIGMA not in r:
                new.add(_norm(r, l, g))
            for w in _powerset(_expand(r, deps) & universe):
                w = frozenset(w)
                new.add(_norm(l, w, g))          # decomposition
                new.add(_norm(l, r, g | w))      # weak union
            for w in _powerset(_expand(l, deps) & universe):
                w = frozenset(w)
                new.add(_norm(w, r, g))          # mirrored decomposition
                new.add(_norm(l, r, g | w))      # mirrored weak union
        for (l1, r1, g1) in stmts:
            for (l2, r2, g2) in stmts:
                if l1 == l2 and g2 == r1 | g1:
                    new.add(_norm(l1, r1 | r2, g1))      # contraction
                if r1 == r2 and g2 == l1 | g1:
                    new.add(_norm(l1 | l2, r1, g1))      # mirrored contraction
        if not new <= stmts:
            stmts |= new
            changed = True
    return stmts


def statement_to_names(statement):
    """Engine CIStatement -> oracle name-triple."""
    return (
        frozenset(a.name for a in statement.left),
        frozenset(a.name for a in statement.right),
        frozenset(a.name for a in statement.given),
    )
