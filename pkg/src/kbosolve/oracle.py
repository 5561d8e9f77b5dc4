"""Brute-force enumeration and direct checking; the test-fixture ground truth.

Enumeration is dynamic programming on weight: terms of weight w are built
from argument tuples of smaller weights, then wrapped in zero-weight-unary
towers up to the height cap (which makes the otherwise-infinite weight
classes finite).  Deliberately simple; not a solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Iterator, Sequence

from .formulas import And, ArithAtom, Formula, Not, TermAtom, evaluate, formula_vars
from .terms import App, Comparison, KboParams, Term, kbo_compare


@dataclass(frozen=True)
class EnumBound:
    max_weight: int
    max_f_height: int = 0


@dataclass(frozen=True)
class OracleResult:
    witness: dict[str, Term] | None  # None means: no witness within the bound

    @property
    def found(self) -> bool:
        return self.witness is not None


NO_WITNESS = OracleResult(None)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def terms_by_weight(params: KboParams, bound: EnumBound) -> list[list[Term]]:
    """index w -> all ground terms of weight w (sorted by the order), w <= bound."""
    f = params.zero_weight_unary
    cap = bound.max_f_height if f is not None else 0
    table: list[list[Term]] = [[] for _ in range(bound.max_weight + 1)]
    for w in range(1, bound.max_weight + 1):
        bucket: list[Term] = []
        for s in params.symbols:
            if s.name == f:
                continue
            if s.arity == 0:
                if s.weight == w:
                    bucket.append(App(s.name))
                continue
            rest = w - s.weight
            if rest < s.arity:  # every argument weighs at least 1
                continue
            for combo in _compositions(rest, s.arity):
                for args in itertools.product(*(table[c] for c in combo)):
                    bucket.append(App(s.name, args))
        if f is not None:
            wrapped = []
            for t in bucket:
                u = t
                for _ in range(cap):
                    u = App(f, (u,))
                    wrapped.append(u)
            bucket.extend(wrapped)
        bucket.sort(key=cmp_to_key(lambda a, b: _cmp(a, b, params)))
        table[w] = bucket
    return table


def _cmp(a: Term, b: Term, params: KboParams) -> int:
    c = kbo_compare(a, b, params)
    return 0 if c is Comparison.EQ else (1 if c is Comparison.GT else -1)


def enum_terms(params: KboParams, bound: EnumBound) -> list[Term]:
    """All ground terms within the bound, each once, weight-then-order ascending."""
    table = terms_by_weight(params, bound)
    return [t for bucket in table for t in bucket]


def count_weight(params: KboParams, x: int, cap: int) -> int:
    """min(cap, number of ground terms of weight exactly x).

    With a zero-weight unary present, any nonempty weight class is infinite,
    so a nonzero count reports the cap.
    """
    if x <= 0:
        return 0
    f = params.zero_weight_unary
    counts = [0] * (x + 1)
    for w in range(1, x + 1):
        total = 0
        for s in params.symbols:
            if s.name == f:
                continue
            if s.arity == 0:
                total += 1 if s.weight == w else 0
                continue
            rest = w - s.weight
            if rest < s.arity:
                continue
            for combo in _compositions(rest, s.arity):
                prod = 1
                for c in combo:
                    if counts[c] == 0:
                        prod = 0
                        break
                    prod = min(prod * counts[c], cap)
                total += prod
                if total >= cap:
                    break
            if total >= cap:
                break
        counts[w] = min(cap, total)
    if f is not None:
        return cap if counts[x] > 0 else 0
    return counts[x]


def brute_force_check(
    f: Formula, params: KboParams, bound: EnumBound, variables: Sequence[str] | None = None
) -> OracleResult:
    """Try every substitution of enumerated terms; first hit wins.

    A miss is explicitly inconclusive: it only says no witness exists within
    the bound.  Assignments extend variable by variable so branches already
    false under a partial assignment are skipped without changing which
    witness is found first.
    """
    names = list(variables) if variables is not None else list(formula_vars(f))
    universe = enum_terms(params, bound)
    if not names:
        return OracleResult({}) if evaluate(f, {}, params) else NO_WITNESS

    needed_cache: dict[int, tuple[str, ...]] = {}

    def known(g, subst) -> bool | None:
        if isinstance(g, (TermAtom, ArithAtom)):
            needed = needed_cache.get(id(g))
            if needed is None:
                needed = formula_vars(g)
                needed_cache[id(g)] = needed
            if any(v not in subst for v in needed):
                return None
            return evaluate(g, subst, params)
        if isinstance(g, Not):
            inner = known(g.arg, subst)
            return None if inner is None else not inner
        if isinstance(g, And):
            vals = [known(p, subst) for p in g.parts]
            if any(v is False for v in vals):
                return False
            if all(v is True for v in vals):
                return True
            return None
        vals = [known(p, subst) for p in g.parts]
        if any(v is True for v in vals):
            return True
        if all(v is False for v in vals):
            return False
        return None

    subst: dict[str, Term] = {}

    def go(i: int) -> dict[str, Term] | None:
        state = known(f, subst)
        if state is False:
            return None
        if i == len(names):
            return dict(subst) if state else None
        v = names[i]
        for t in universe:
            subst[v] = t
            res = go(i + 1)
            if res is not None:
                return res
        del subst[v]
        return None

    res = go(0)
    return OracleResult(res) if res is not None else NO_WITNESS
