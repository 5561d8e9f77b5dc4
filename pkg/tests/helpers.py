"""Shared test utilities: exhaustive oracles and random input generators."""

from __future__ import annotations

import itertools
import random

from kbosolve.formulas import (
    And,
    ArithAtom,
    ArithRel,
    Formula,
    Not,
    Or,
    TermAtom,
    TermRel,
    evaluate,
)
from kbosolve.isolation import IsolatedForm
from kbosolve.lia import LinSystem
from kbosolve.oracle import EnumBound, enum_terms
from kbosolve.terms import (
    App,
    Comparison,
    KboParams,
    Term,
    Var,
    WeightExpr,
    ground_weight,
    is_ground,
    kbo_compare,
    substitute,
    weight_of,
)


def exhaustive_lia(system: LinSystem, box: int) -> dict[str, int] | None:
    """Complete search over [0, box]^n with partial-assignment pruning."""
    names = sorted(system.variables())
    by_ready: list[list] = [[] for _ in range(len(names) + 1)]
    pos = {v: i for i, v in enumerate(names)}
    for a in system.atoms:
        vs = {v for e in (a.left, a.right) for v, _ in e.coeffs}
        level = max((pos[v] + 1 for v in vs), default=0)
        by_ready[level].append(a)
    assignment: dict[str, int] = {}

    def go(i: int) -> dict[str, int] | None:
        if not all(a.holds(assignment) for a in by_ready[i]):
            return None
        if i == len(names):
            return dict(assignment)
        for val in range(box + 1):
            assignment[names[i]] = val
            res = go(i + 1)
            if res is not None:
                return res
        del assignment[names[i]]
        return None

    return go(0)


# --- random formulas ----------------------------------------------------------


def random_term(rng: random.Random, params: KboParams, names: list[str], depth: int) -> Term:
    choices: list[str] = ["var"] * 3 + [s.name for s in params.symbols if depth or s.arity == 0]
    pick = rng.choice(choices)
    if pick == "var":
        return Var(rng.choice(names))
    sym = params.symbol(pick)
    return App(pick, tuple(random_term(rng, params, names, depth - 1) for _ in range(sym.arity)))


def random_atom(rng: random.Random, params: KboParams, names: list[str], depth: int = 2) -> Formula:
    l = random_term(rng, params, names, depth)
    r = random_term(rng, params, names, depth)
    kind = rng.randrange(6)
    if kind < 4:
        rel = (TermRel.SUCC, TermRel.EQ, TermRel.SUCC_W, TermRel.SUCC_LEX)[kind]
        return TermAtom(l, r, rel)
    wl = weight_of(l, params)
    wr = weight_of(r, params).add_const(rng.randint(0, 2))
    return ArithAtom(wl, wr, rng.choice([ArithRel.GT, ArithRel.GE, ArithRel.EQ]))


def random_formula(
    rng: random.Random,
    params: KboParams,
    max_vars: int = 4,
    max_atoms: int = 3,
    depth: int = 2,
    allow_arith: bool = True,
) -> Formula:
    names = [f"x{i}" for i in range(1, rng.randint(1, max_vars) + 1)]
    atoms = []
    for _ in range(rng.randint(1, max_atoms)):
        a = random_atom(rng, params, names, depth)
        while not allow_arith and isinstance(a, ArithAtom):
            a = random_atom(rng, params, names, depth)
        atoms.append(a)
    f: Formula = atoms[0]
    for a in atoms[1:]:
        combine = rng.random()
        if combine < 0.6:
            f = And((f, a))
        elif combine < 0.85:
            f = Or((f, a))
        else:
            f = And((f, Not(a)))
    return f


def random_constants_formula(
    rng: random.Random, params: KboParams, max_vars: int = 4, max_atoms: int = 4
) -> Formula:
    names = [f"x{i}" for i in range(1, rng.randint(1, max_vars) + 1)]
    consts = [s.name for s in params.symbols]

    def term() -> Term:
        return Var(rng.choice(names)) if rng.random() < 0.6 else App(rng.choice(consts))

    atoms: list[Formula] = []
    for _ in range(rng.randint(1, max_atoms)):
        a: Formula = TermAtom(term(), term(), rng.choice([TermRel.SUCC, TermRel.EQ]))
        if rng.random() < 0.2:
            a = Not(a)
        atoms.append(a)
    f = atoms[0]
    for a in atoms[1:]:
        f = And((f, a)) if rng.random() < 0.7 else Or((f, a))
    return f


# --- bounded solution sets ------------------------------------------------------


def constraint_solutions(
    atoms, names: list[str], params: KboParams, bound: EnumBound
) -> set[tuple]:
    """All substitutions (as value tuples over `names`) satisfying a conjunction."""
    universe = enum_terms(params, bound)
    out = set()
    formula = And(tuple(atoms))
    for values in itertools.product(universe, repeat=len(names)):
        sub = dict(zip(names, values))
        if evaluate(formula, sub, params):
            out.add(values)
    return out


def iso_solutions(
    iso: IsolatedForm,
    params: KboParams,
    search_bound: EnumBound,
    project: list[str],
    keep_bound: EnumBound,
) -> set[tuple]:
    """Projections of bounded solutions of an isolated form onto `project`.

    Free variables range over the search bound; dependents are computed by
    substitution.  Only projections whose values fit the keep bound are
    reported.
    """
    deps = {y for y, _ in iso.triang}
    free = [v for v in iso.variables() if v not in deps]
    for v in project:
        if v not in deps and v not in free:
            free.append(v)
    universe = enum_terms(params, search_bound)
    keep_terms = set(enum_terms(params, keep_bound))
    simp_pairs = [
        (chain[i], chain[i + 1]) for chain in iso.simp for i in range(len(chain) - 1)
    ]
    out: set[tuple] = set()
    assignment: dict[str, Term] = {}

    def arith_ok_partial() -> bool:
        for a in iso.arith:
            vs = {v for e in (a.left, a.right) for v, _ in e.coeffs}
            if not vs <= assignment.keys():
                continue
            if not evaluate(a, assignment, params):
                return False
        return True

    def complete() -> None:
        full = dict(assignment)
        for y, t in reversed(iso.triang):
            val = substitute(t, full)
            if not is_ground(val):
                return
            full[y] = val
        for a in iso.arith:
            if not evaluate(a, full, params):
                return
        for l, r in simp_pairs:
            tl, tr = full[l], full[r]
            if ground_weight(tl, params) != ground_weight(tr, params):
                return
            if kbo_compare(tl, tr, params) is not Comparison.GT:
                return
        values = tuple(full[v] for v in project)
        if all(v in keep_terms for v in values):
            out.add(values)

    def go(i: int) -> None:
        if i == len(free):
            complete()
            return
        for t in universe:
            assignment[free[i]] = t
            if arith_ok_partial():
                go(i + 1)
        del assignment[free[i]]

    go(0)
    return out
