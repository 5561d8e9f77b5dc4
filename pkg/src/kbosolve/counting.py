"""Counting ground terms by weight, and Presburger formulas about the counts.

Three signature classes behave differently: with a zero-weight unary every
nonempty weight class is infinite; with at most one unary and no wider symbol
each weight holds at most one tower per constant; otherwise weight classes
grow, and beyond the threshold N*N1 + N2 every nonempty class exceeds N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .lia import LIN_FALSE, LinAnd, LinAtom, LinExists, LinExpr, LinOr, LinRel, LinSystem
from .terms import App, KboParams, Term


class WrongSignatureClassError(ValueError):
    pass


@dataclass(frozen=True)
class SignatureStats:
    total: int
    wide: int        # symbols of arity >= 2
    nonconstant: int
    max_weight: int
    max_arity: int


def stats(params: KboParams) -> SignatureStats:
    return SignatureStats(
        total=len(params.symbols),
        wide=sum(1 for s in params.symbols if s.arity >= 2),
        nonconstant=sum(1 for s in params.symbols if s.arity > 0),
        max_weight=max(s.weight for s in params.symbols),
        max_arity=max(s.arity for s in params.symbols),
    )


def content_var_names(params: KboParams) -> tuple[str, ...]:
    # '#' cannot appear in a parsed identifier, so these never collide with
    # term variables; expansion renames them apart per instantiation.
    return tuple(f"#n{i + 1}" for i in range(len(params.symbols)))


def exists_atoms(params: KboParams, x: str, names: tuple[str, ...]) -> tuple[LinAtom, ...]:
    """The two equations whose natural solutions are exactly the (weight,
    contents) pairs of constructible ground terms."""
    weight_eq = LinAtom(
        LinExpr.var(x),
        LinRel.EQ,
        LinExpr.of(0, {n: s.weight for n, s in zip(names, params.symbols) if s.weight}),
    )
    balance = LinAtom(
        LinExpr.of(1, {n: s.arity - 1 for n, s in zip(names, params.symbols) if s.arity != 1}),
        LinRel.EQ,
        LinExpr.of(0),
    )
    return (weight_eq, balance)


def exists_system(params: KboParams, x: str = "x") -> LinSystem:
    """Feasibility template over (x, one count per symbol in declaration order)."""
    return LinSystem(exists_atoms(params, x, content_var_names(params)))


def exists_formula(params: KboParams, x: str) -> LinExists:
    names = content_var_names(params)
    return LinExists(names, LinAnd(exists_atoms(params, x, names)))


def _signature_class(params: KboParams) -> str:
    if params.zero_weight_unary is not None:
        return "zero_weight_unary"
    st = stats(params)
    unaries = st.nonconstant - st.wide
    if st.wide == 0 and unaries <= 1:
        return "thin"  # at most one unary over constants (possibly constants only)
    return "branching"


def thresholds(params: KboParams) -> tuple[int, int]:
    """Constants (N1, N2) with: x > N*N1 + N2 implies the count of weight-x
    terms is 0 or exceeds N."""
    if _signature_class(params) != "branching":
        raise WrongSignatureClassError(
            "thresholds apply to signatures with a wide symbol or two unaries and no zero-weight unary"
        )
    st = stats(params)
    n1 = st.max_weight * st.max_arity
    n2 = st.max_weight * st.max_weight * (st.max_arity + 1) + st.max_weight
    return n1, n2


# --- truncated number of terms -------------------------------------------------


def _feasible_contents(weight: int, params: KboParams) -> list[tuple[int, ...]]:
    """All contents vectors with exact total weight and balanced arities."""
    syms = params.symbols
    out: list[tuple[int, ...]] = []

    def extend(i: int, remaining: int, balance: int, acc: list[int]) -> None:
        if i == len(syms):
            if remaining == 0 and balance == 0:
                out.append(tuple(acc))
            return
        s = syms[i]
        cap = remaining // s.weight if s.weight else weight
        for n in range(cap + 1):
            extend(i + 1, remaining - n * s.weight, balance + n * (s.arity - 1), acc + [n])

    extend(0, weight, 1, [])
    return out


def _count_with_contents(con: tuple[int, ...], cap: int, params: KboParams) -> int:
    """min(cap, number of terms with exactly these contents).

    Builds terms depth by depth, keeping only those whose contents stay
    pointwise below the target; a full level of cap distinct same-depth terms
    already guarantees cap extensions to the target contents.
    """
    index = {s.name: i for i, s in enumerate(params.symbols)}
    syms = params.symbols

    def add_contents(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...] | None:
        c = tuple(x + y for x, y in zip(a, b))
        return c if all(x <= m for x, m in zip(c, con)) else None

    unit = [tuple(1 if j == i else 0 for j in range(len(syms))) for i in range(len(syms))]
    pool: dict[Term, tuple[int, tuple[int, ...]]] = {}  # term -> (depth, contents)
    level = {
        App(s.name): unit[i]
        for i, s in enumerate(syms)
        if s.arity == 0 and con[i] >= 1
    }
    depth = 1
    exact = 0
    while level:
        if len(level) >= cap:
            return cap
        for t, c in level.items():
            pool[t] = (depth, c)
            if c == con:
                exact += 1
                if exact >= cap:
                    return cap
        next_level: dict[Term, tuple[int, ...]] = {}
        by_depth = list(pool.items())
        for i, s in enumerate(syms):
            if s.arity == 0 or con[i] == 0:
                continue

            def tuples(pos: int, acc_terms: list[Term], acc_con: tuple[int, ...], deep: bool) -> None:
                if len(next_level) >= cap:
                    return
                if pos == s.arity:
                    if deep:
                        next_level[App(s.name, tuple(acc_terms))] = acc_con
                    return
                for t, (d, c) in by_depth:
                    merged = add_contents(acc_con, c)
                    if merged is None:
                        continue
                    tuples(pos + 1, acc_terms + [t], merged, deep or d == depth)

            tuples(0, [], unit[i], False)
        if len(next_level) >= cap:
            return cap
        level = next_level
        depth += 1
    return min(cap, exact)


@lru_cache(maxsize=None)
def tnt(n: int, m: int, params: KboParams) -> int:
    """min(n, number of ground terms of weight m), by stratified construction."""
    if _signature_class(params) != "branching":
        raise WrongSignatureClassError("tnt requires the branching signature class")
    if n <= 0:
        return 0
    total = 0
    for con in _feasible_contents(m, params):
        total += _count_with_contents(con, n - total, params)
        if total >= n:
            return n
    return total


# --- at_least formulas ----------------------------------------------------------


@lru_cache(maxsize=None)
def at_least(n: int, params: KboParams, var: str = "x"):
    """Formula in one free variable, valid exactly when at least n different
    ground terms of that weight exist."""
    if n <= 0:
        raise ValueError("n must be positive")
    klass = _signature_class(params)
    if klass == "zero_weight_unary":
        # every nonempty weight class is infinite
        return exists_formula(params, var)
    if klass == "thin":
        unary = next((s for s in params.symbols if s.arity == 1), None)
        consts = params.constants
        if len(consts) < n:
            return LIN_FALSE
        disjuncts = []
        for subset in itertools.combinations(consts, n):
            parts = []
            for c in subset:
                if unary is not None:
                    parts.append(
                        LinExists(
                            ("#k",),
                            LinAtom(
                                LinExpr.of(c.weight, {"#k": unary.weight}),
                                LinRel.EQ,
                                LinExpr.var(var),
                            ),
                        )
                    )
                else:
                    parts.append(LinAtom(LinExpr.var(var), LinRel.EQ, LinExpr.of(c.weight)))
            disjuncts.append(LinAnd(tuple(parts)))
        return LinOr(tuple(disjuncts))
    n1, n2 = thresholds(params)
    bound = n * n1 + n2
    small = [m for m in range(1, bound + 1) if tnt(n, m, params) >= n]
    # small weights first, so witness search starts at minimal weights
    tail = LinAnd(
        (
            exists_formula(params, var),
            LinAtom(LinExpr.var(var), LinRel.GT, LinExpr.of(bound)),
        )
    )
    parts = tuple(
        LinAtom(LinExpr.var(var), LinRel.EQ, LinExpr.of(m)) for m in small
    ) + (tail,)
    return LinOr(parts)
