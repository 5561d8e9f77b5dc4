"""Turn flat constraints into chains: single sequences t1 # t2 # ... # tn.

A chain totally arranges every term (and every argument variable) of a
constraint; connectors are weight-strict (W), weight-equal-lexicographic
(LEX), or equality (EQ).  Rather than materializing the five-way split for
each unrelated pair and normalizing afterwards, `chain_branches` inserts
terms one at a time into a growing arrangement, which enumerates exactly the
consistent branches.  Pairs are pre-pruned with sound weight and subterm
analysis, so arrangements contradicting e.g. |s(u)| > |u| never spawn.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import islice
from typing import Callable, Iterable, Iterator, Sequence

from .formulas import TermAtom, TermRel
from .terms import (
    App,
    Comparison,
    KboParams,
    Term,
    Var,
    is_ground,
    is_proper_subterm,
    kbo_compare,
    term_size,
    weight_of,
)


class Conn(enum.Enum):
    W = ">w"
    LEX = ">lex"
    EQ = "="


@dataclass(frozen=True)
class Chain:
    terms: tuple[Term, ...]
    conns: tuple[Conn, ...]

    def __post_init__(self) -> None:
        assert len(self.conns) == max(0, len(self.terms) - 1)

    def size(self) -> int:
        return sum(term_size(t) for t in self.terms)

    def rows(self) -> list[tuple[int, int]]:
        """Half-open index ranges of the maximal W-free segments."""
        if not self.terms:
            return []
        out = []
        start = 0
        for i, c in enumerate(self.conns):
            if c is Conn.W:
                out.append((start, i + 1))
                start = i + 1
        out.append((start, len(self.terms)))
        return out

    def atoms(self) -> list[TermAtom]:
        rel = {Conn.W: TermRel.SUCC_W, Conn.LEX: TermRel.SUCC_LEX, Conn.EQ: TermRel.EQ}
        return [
            TermAtom(self.terms[i], self.terms[i + 1], rel[c]) for i, c in enumerate(self.conns)
        ]


EMPTY_CHAIN = Chain((), ())


def is_flat(t: Term) -> bool:
    return isinstance(t, Var) or all(isinstance(a, Var) for a in t.args)


def check_chained(chain: Chain) -> None:
    """Assert the three structural conditions on a chain of flat terms."""
    seen = set()
    names = {t.name for t in chain.terms if isinstance(t, Var)}
    for t in chain.terms:
        if not is_flat(t):
            raise ValueError(f"non-flat chain term {t}")
        if t in seen:
            raise ValueError(f"term occurs twice in chain: {t}")
        seen.add(t)
    for t in chain.terms:
        if isinstance(t, App):
            for a in t.args:
                if a.name not in names:  # type: ignore[union-attr]
                    raise ValueError(f"argument {a} of {t} is not a chain term")


# --- flattening -------------------------------------------------------------


def flatten(atoms: Sequence[TermAtom], fresh: Callable[[], str]) -> list[TermAtom]:
    """Replace nested arguments by fresh variables with defining equalities.

    Equal subterms share one variable, innermost subterms are named first,
    and already-flat constraints come back unchanged.
    """
    defs: list[TermAtom] = []
    cache: dict[Term, Var] = {}

    def flat_args(t: App) -> App:
        new_args = []
        for a in t.args:
            if isinstance(a, Var):
                new_args.append(a)
            else:
                flat = flat_args(a)
                v = cache.get(flat)
                if v is None:
                    v = Var(fresh())
                    cache[flat] = v
                    defs.append(TermAtom(v, flat, TermRel.EQ))
                new_args.append(v)
        return App(t.head, tuple(new_args))

    def flat_side(t: Term) -> Term:
        return t if isinstance(t, Var) else flat_args(t)

    rewritten = [TermAtom(flat_side(a.left), flat_side(a.right), a.rel) for a in atoms]
    return defs + rewritten


# --- pairwise relation analysis ---------------------------------------------

# Relations of an ordered pair (s, t): s above t by weight (SW), s above t in
# the same weight (SL), equal (EQ), and the two mirror images.
_ALL = frozenset({"SW", "SL", "EQ", "TW", "TL"})
_MIRROR = {"SW": "TW", "SL": "TL", "EQ": "EQ", "TW": "SW", "TL": "SL"}

_INF = float("inf")


def _weight_diff_range(s: Term, t: Term, params: KboParams) -> tuple[float, float]:
    ws, wt = weight_of(s, params), weight_of(t, params)
    coeffs = ws.coeff_map
    for v, c in wt.coeffs:
        coeffs[v] = coeffs.get(v, 0) - c
    const = ws.constant - wt.constant
    lo: float = const
    hi: float = const
    for c in coeffs.values():
        if c > 0:
            lo += c  # variable weights are at least 1
            hi = _INF
        elif c < 0:
            lo = -_INF
            hi += c
    return lo, hi


def allowed_relations(s: Term, t: Term, params: KboParams) -> frozenset[str]:
    """Sound over-approximation of the relations a ground instance can take."""
    if is_ground(s) and is_ground(t):
        c = kbo_compare(s, t, params)
        if c is Comparison.EQ:
            return frozenset({"EQ"})
        weq = weight_of(s, params).constant == weight_of(t, params).constant
        if c is Comparison.GT:
            return frozenset({"SL" if weq else "SW"})
        return frozenset({"TL" if weq else "TW"})
    out = set(_ALL)
    lo, hi = _weight_diff_range(s, t, params)
    if lo > 0:
        out &= {"SW"}
    elif hi < 0:
        out &= {"TW"}
    else:
        if lo >= 0:
            out.discard("TW")
        if hi <= 0:
            out.discard("SW")
        if not (lo <= 0 <= hi):
            out -= {"SL", "EQ", "TL"}
    if isinstance(s, App) and isinstance(t, App) and s.head != t.head:
        out.discard("EQ")
    if is_proper_subterm(t, s):
        out -= {"EQ", "TW", "TL"}
    elif is_proper_subterm(s, t):
        out -= {"EQ", "SW", "SL"}
    return frozenset(out)


_ATOM_REL = {
    TermRel.SUCC_W: frozenset({"SW"}),
    TermRel.SUCC_LEX: frozenset({"SL"}),
    TermRel.EQ: frozenset({"EQ"}),
    TermRel.SUCC: frozenset({"SW", "SL"}),
}


def _universe(atoms: Sequence[TermAtom], extra: Iterable[Term]) -> list[Term]:
    index: dict[Term, int] = {}
    for a in atoms:
        for side in (a.left, a.right):
            index.setdefault(side, len(index))
    for a in atoms:
        for side in (a.left, a.right):
            if isinstance(side, App):
                for arg in side.args:
                    index.setdefault(arg, len(index))
    for t in extra:
        index.setdefault(t, len(index))
    return list(index)


def _pair_constraints(
    atoms: Sequence[TermAtom],
    universe: list[Term],
    params: KboParams,
) -> dict[tuple[int, int], frozenset[str]] | None:
    """Allowed relation sets per index pair (i < j), or None if plainly unsat."""
    index = {t: i for i, t in enumerate(universe)}
    allowed: dict[tuple[int, int], frozenset[str]] = {}
    for a in atoms:
        i, j = index[a.left], index[a.right]
        if i == j:
            if a.rel is TermRel.EQ:
                continue
            return None  # s # s with a strict relation
        rels = _ATOM_REL[a.rel]
        if i > j:
            i, j = j, i
            rels = frozenset(_MIRROR[r] for r in rels)
        cur = allowed.get((i, j), _ALL)
        allowed[(i, j)] = cur & rels
        if not allowed[(i, j)]:
            return None
    n = len(universe)
    for i in range(n):
        for j in range(i + 1, n):
            base = allowed_relations(universe[i], universe[j], params)
            cur = allowed.get((i, j), _ALL) & base
            if not cur:
                if (i, j) in allowed:
                    return None  # an atom demands an impossible relation
                cur = frozenset()  # unrelated pair that no arrangement may relate
            allowed[(i, j)] = cur
    return allowed


def chain_branches(
    atoms: Sequence[TermAtom],
    params: KboParams,
    extra_terms: Iterable[Term] = (),
    tick: Callable[[], None] | None = None,
) -> Iterator[Chain]:
    """Enumerate every chain consistent with the given flat atoms.

    The union of solutions over emitted chains equals the solutions of the
    conjunction; unsatisfiable arrangements are pruned as soon as a placed
    pair contradicts an atom or the weight/subterm analysis.
    """
    universe = _universe(atoms, extra_terms)
    if not universe:
        yield EMPTY_CHAIN
        return
    allowed = _pair_constraints(atoms, universe, params)
    if allowed is None:
        return

    def pair_ok(i: int, j: int, rel: str) -> bool:
        if i > j:
            i, j = j, i
            rel = _MIRROR[rel]
        return rel in allowed[(i, j)]

    # classes: list of lists of term indices; conns: "W"/"LEX" between classes
    def place(k: int, classes: list[list[int]], conns: list[Conn]) -> Iterator[Chain]:
        if tick is not None:
            tick()
        if k == len(universe):
            terms = []
            chain_conns = []
            for ci, cls in enumerate(classes):
                for mi, m in enumerate(cls):
                    if mi or ci:
                        chain_conns.append(Conn.EQ if mi else conns[ci - 1])
                    terms.append(universe[m])
            yield Chain(tuple(terms), tuple(chain_conns))
            return

        def compatible(pos: int, new_classes: list[list[int]], new_conns: list[Conn]) -> bool:
            # pos is the class index of term k in the candidate arrangement
            for ci, cls in enumerate(new_classes):
                for m in cls:
                    if m == k:
                        continue
                    if ci == pos:
                        rel = "EQ"
                    else:
                        lo, hi = min(ci, pos), max(ci, pos)
                        seg = new_conns[lo:hi]
                        rel = ("S" if pos < ci else "T") + ("W" if Conn.W in seg else "L")
                    if not pair_ok(k, m, rel):
                        return False
            return True

        n = len(classes)
        for p in range(n + 1):
            # new singleton class in gap p
            if p == 0 or p == n:
                conn_options: list[tuple[Conn, ...]] = [(Conn.W,), (Conn.LEX,)] if n else [()]
            elif conns[p - 1] is Conn.W:
                conn_options = [(Conn.W, Conn.W), (Conn.W, Conn.LEX), (Conn.LEX, Conn.W)]
            else:
                conn_options = [(Conn.LEX, Conn.LEX)]
            for opt in conn_options:
                if p == 0:
                    new_conns = list(opt) + conns
                elif p == n:
                    new_conns = conns + list(opt)
                else:
                    new_conns = conns[: p - 1] + list(opt) + conns[p:]
                new_classes = classes[:p] + [[k]] + classes[p:]
                if compatible(p, new_classes, new_conns):
                    yield from place(k + 1, new_classes, new_conns)
            if p < n:
                new_classes = [list(c) for c in classes]
                new_classes[p].append(k)
                if compatible(p, new_classes, conns):
                    yield from place(k + 1, new_classes, conns)

    yield from place(1, [[0]], [])


def normalize_chain(atoms: Sequence[TermAtom], params: KboParams) -> Chain | None:
    """Arrange a constraint with total pairwise comparison info, or detect ⊥.

    Cycles through strict relations and transitive subconstraints that
    contradict the path relation make the constraint unsatisfiable (None);
    redundant transitive edges and duplicated equalities are dropped.
    """
    universe = _universe(atoms, ())
    index = {t: i for i, t in enumerate(universe)}
    related = set()
    for a in atoms:
        i, j = index[a.left], index[a.right]
        if i != j:
            related.add((min(i, j), max(i, j)))
    for i in range(len(universe)):
        for j in range(i + 1, len(universe)):
            if (i, j) not in related:
                raise ValueError("normalize_chain requires total comparison info")
    found = list(islice(chain_branches(atoms, params), 2))
    if not found:
        return None
    if len(found) > 1:
        raise ValueError("comparison info does not pin a unique chain")
    return found[0]
