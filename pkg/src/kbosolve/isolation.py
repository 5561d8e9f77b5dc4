"""Reduce chained constraints to isolated forms.

A working constraint is the four-part conjunction chain/arith/triangle/simple.
Each pass consumes the first row of the chain (the segment of greatest
weight): equalities are triangulated away, remaining tower-shaped entries are
replaced by guessed shapes f^m(g(fresh vars)), adjacent pairs decompose into
weight equations plus argument constraints, and the residual variable
constraints are pushed into the triangle, simple, or chain parts.  The chain
part strictly shrinks, so the recursion terminates with chain-free
(= isolated) constraints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .chaining import Chain, Conn, EMPTY_CHAIN, chain_branches
from .formulas import ArithAtom, ArithRel, TermAtom, TermRel
from .terms import (
    App,
    KboParams,
    Term,
    Var,
    f_split,
    f_wrap,
    term_vars,
    weight_of,
)

Trace = Callable[[str], None]


def _no_trace(_msg: str) -> None:
    return None


@dataclass(frozen=True)
class Working:
    chain: Chain
    arith: tuple[ArithAtom, ...]
    triang: tuple[tuple[str, Term], ...]
    simp: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class IsolatedForm:
    arith: tuple[ArithAtom, ...]
    triang: tuple[tuple[str, Term], ...]
    simp: tuple[tuple[str, ...], ...]

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for atom in self.arith:
            for e in (atom.left, atom.right):
                for v, _ in e.coeffs:
                    seen.setdefault(v, None)
        for y, t in self.triang:
            seen.setdefault(y, None)
            for v in term_vars(t):
                seen.setdefault(v, None)
        for chain in self.simp:
            for v in chain:
                seen.setdefault(v, None)
        return tuple(seen)


def validate_isolated(iso: IsolatedForm) -> None:
    """Check triangle form and the disjointness conditions on the simple part."""
    deps = [y for y, _ in iso.triang]
    if len(set(deps)) != len(deps):
        raise ValueError("triangle dependents are not pairwise distinct")
    for i, (y, _) in enumerate(iso.triang):
        for j in range(i, len(iso.triang)):
            if y in set(term_vars(iso.triang[j][1])):
                raise ValueError(f"dependent {y} occurs in a later right-hand side")
    simp_vars = [v for chain in iso.simp for v in chain]
    if len(set(simp_vars)) != len(simp_vars):
        raise ValueError("simple-part variables are not pairwise distinct")
    if set(simp_vars) & set(deps):
        raise ValueError("simple-part variable is dependent in the triangle part")


# --- substitution on quasi-flat chains ---------------------------------------


def _subst_quasi(t: Term, mapping: dict[str, Term], params: KboParams) -> Term:
    """Apply a var->term map to a quasi-flat term, composing f-towers."""
    k, base = f_split(t, params)
    if isinstance(base, Var):
        rep = mapping.get(base.name)
        if rep is None:
            return t
        m, core = f_split(rep, params)
        return f_wrap(k + m, core, params)
    new_args = []
    for a in base.args:
        if isinstance(a, Var) and a.name in mapping:
            rep = mapping[a.name]
            if not isinstance(rep, Var):
                raise AssertionError("argument substituted by a non-variable")
            new_args.append(rep)
        else:
            new_args.append(a)
    return f_wrap(k, App(base.head, tuple(new_args)), params)


def _normalize_chain_terms(
    terms: list[Term], conns: list[Conn]
) -> tuple[list[Term], list[Conn]] | None:
    """Drop duplicated terms joined by equalities; detect impossible repeats."""
    while True:
        seen: dict[Term, int] = {}
        dup: tuple[int, int] | None = None
        for i, t in enumerate(terms):
            if t in seen:
                dup = (seen[t], i)
                break
            seen[t] = i
        if dup is None:
            return terms, conns
        i, j = dup
        if any(c is not Conn.EQ for c in conns[i:j]):
            return None  # the same term in two weight classes or strictly above itself
        del terms[j]
        del conns[j - 1]


def _apply_subst(chain: Chain, mapping: dict[str, Term], params: KboParams) -> Chain | None:
    terms = [_subst_quasi(t, mapping, params) for t in chain.terms]
    normalized = _normalize_chain_terms(terms, list(chain.conns))
    if normalized is None:
        return None
    ts, cs = normalized
    return Chain(tuple(ts), tuple(cs))


def _first_row(chain: Chain) -> tuple[int, int]:
    rows = chain.rows()
    return rows[0]


# --- first-row cleanup --------------------------------------------------------


def first_row_cleanup(chain: Chain, params: KboParams) -> Chain | None:
    """Enforce the occurrence discipline on first-row variables.

    A variable standing in the first row may occur only there: once on its
    own, or additionally inside a zero-weight-unary wrapper placed strictly
    above it with at least one LEX connector in between.  Any other repeat
    makes the constraint unsatisfiable.
    """
    if not chain.terms:
        return chain
    start, end = _first_row(chain)
    f = params.zero_weight_unary
    positions = {t: i for i, t in enumerate(chain.terms)}
    for j in range(start, end):
        t = chain.terms[j]
        if not isinstance(t, Var):
            continue
        y = t.name
        # occurrences below the first row (as a term or inside one)
        for i in range(end, len(chain.terms)):
            if y in set(term_vars(chain.terms[i])):
                return None
        # occurrences inside first-row terms
        for n in range(start, end):
            other = chain.terms[n]
            if isinstance(other, Var) or y not in set(term_vars(other)):
                continue
            if f is None or other != App(f, (t,)):
                return None
            if n >= j:
                return None
            if all(c is Conn.EQ for c in chain.conns[n:j]):
                return None  # f(y) equated with y
    return chain


# --- row equality elimination --------------------------------------------------


def _is_var_or_f_flat(t: Term, params: KboParams) -> bool:
    f = params.zero_weight_unary
    if isinstance(t, Var):
        return True
    return f is not None and t.head == f and isinstance(t.args[0], Var)


def _triangulate_var_equalities(
    pairs: list[tuple[Term, Term]], params: KboParams
) -> list[tuple[str, Term]] | None:
    """Triangulate equalities whose sides are variables or f-wrapped variables."""
    f = params.zero_weight_unary

    def reduce(ps: list[tuple[Term, Term]]) -> list[tuple[Term, Term]]:
        out = []
        for u, v in ps:
            while (
                isinstance(u, App)
                and isinstance(v, App)
                and f is not None
                and u.head == f
                and v.head == f
            ):
                u, v = u.args[0], v.args[0]
            if u != v:
                out.append((u, v))
        return out

    work = reduce(pairs)
    result: list[tuple[str, Term]] = []
    while work:
        f_arg_vars = {
            t.args[0].name  # type: ignore[union-attr]
            for pair in work
            for t in pair
            if isinstance(t, App)
        }
        chosen = None
        for idx, (u, v) in enumerate(work):
            if isinstance(u, Var) and u.name not in f_arg_vars:
                chosen = (idx, u, v)
                break
            if isinstance(v, Var) and v.name not in f_arg_vars:
                chosen = (idx, v, u)
                break
        if chosen is None:
            return None  # every candidate occurs under f: no finite solution
        idx, x, t = chosen
        result.append((x.name, t))
        del work[idx]
        renamed = []
        for u, v in work:
            u2 = t if u == x else u
            v2 = t if v == x else v
            renamed.append((u2, v2))
        work = reduce(renamed)
    return result


def eliminate_row_equalities(w: Working, params: KboParams, trace: Trace = _no_trace) -> Working | None:
    """Remove every equality connector from the first row.

    Variable-level equalities are triangulated first; the survivors are
    equalities against non-variable shapes, which either clash, decompose
    argument-wise, or define a variable that moves to the triangle part.
    """
    chain = w.chain
    terms = list(chain.terms)
    conns = list(chain.conns)
    triang = list(w.triang)

    def row_end() -> int:
        for i, c in enumerate(conns):
            if c is Conn.W:
                return i + 1
        return len(terms)

    # variable/f-term equalities, triangulated in one go
    end = row_end()
    s_pairs = [
        (terms[i], terms[i + 1])
        for i in range(end - 1)
        if conns[i] is Conn.EQ
        and _is_var_or_f_flat(terms[i], params)
        and _is_var_or_f_flat(terms[i + 1], params)
    ]
    if s_pairs:
        tri = _triangulate_var_equalities(s_pairs, params)
        if tri is None:
            trace("row equalities: circular variable equalities")
            return None
        resolved: dict[str, Term] = {}
        for x, t in reversed(tri):
            resolved[x] = _subst_quasi(t, resolved, params)
        normalized = _normalize_chain_terms(
            [_subst_quasi(t, resolved, params) for t in terms], conns
        )
        if normalized is None:
            return None
        terms, conns = normalized
        triang.extend(tri)
        for x, t in tri:
            trace(f"row equality: {x} defined")

    # remaining equalities involve a non-variable, non-f shape on some side
    while True:
        end = row_end()
        pos = next((i for i in range(end - 1) if conns[i] is Conn.EQ), None)
        if pos is None:
            break
        u, v = terms[pos], terms[pos + 1]
        if u == v:
            del terms[pos + 1]
            del conns[pos]
            continue
        ku, bu = f_split(u, params)
        kv, bv = f_split(v, params)
        peel = min(ku, kv)
        ku -= peel
        kv -= peel

        def define(x: Var, t: Term) -> bool:
            if x.name in set(term_vars(t)):
                return False  # x would be a proper subterm of its own value
            triang.append((x.name, t))
            trace(f"row equality: {x.name} defined")
            return True

        if ku == 0 and kv == 0:
            if isinstance(bu, Var) or isinstance(bv, Var):
                x, t = (bu, bv) if isinstance(bu, Var) else (bv, bu)
                if not define(x, t):
                    return None
                mapping = {x.name: t}
            else:
                if bu.head != bv.head:
                    trace("row equality: head clash")
                    return None
                diff = next(
                    (i for i, (a, b) in enumerate(zip(bu.args, bv.args)) if a != b), None
                )
                if diff is None:
                    raise AssertionError("identical terms not collapsed")
                x_i, y_i = bu.args[diff], bv.args[diff]
                triang.append((y_i.name, x_i))  # type: ignore[union-attr]
                trace(f"row equality: argument {y_i.name} unified")
                mapping = {y_i.name: x_i}  # type: ignore[union-attr]
        else:
            # exactly one side keeps a leading tower
            tall_k, tall_base = (ku, bu) if ku else (kv, bv)
            other = bv if ku else bu
            if isinstance(other, Var):
                if not define(other, f_wrap(tall_k, tall_base, params)):
                    return None
                mapping = {other.name: f_wrap(tall_k, tall_base, params)}
            else:
                trace("row equality: tower against other head")
                return None
        normalized = _normalize_chain_terms(
            [_subst_quasi(t, mapping, params) for t in terms], conns
        )
        if normalized is None:
            return None
        terms, conns = normalized

    return Working(Chain(tuple(terms), tuple(conns)), w.arith, tuple(triang), w.simp)


# --- shape guessing -----------------------------------------------------------


def guess_shapes(
    w: Working,
    row_len: int,
    params: KboParams,
    fresh: Callable[[], str],
    trace: Trace = _no_trace,
) -> Iterator[tuple[Working, frozenset[str]]]:
    """Branch over shapes for every tower-shaped entry of the first row.

    Pure-variable rows do not guess: the row moves wholesale to the simple
    part (plus the weight link to the next row).  Otherwise each f^k(x) entry
    substitutes x := f^m(g(fresh vars)) for every non-f symbol g and every
    tower height m up to the row length (m = 0 only when the signature has no
    zero-weight unary).
    """
    chain = w.chain
    start, end = _first_row(chain)
    row = list(chain.terms[start:end])

    if all(isinstance(t, Var) for t in row):
        names = tuple(t.name for t in row)  # type: ignore[union-attr]
        arith = w.arith
        if end < len(chain.terms):
            arith = arith + (
                ArithAtom(weight_of(row[-1], params), weight_of(chain.terms[end], params), ArithRel.GT),
            )
        rest = Chain(chain.terms[end:], chain.conns[end:])
        trace("row of variables: moved to simple part")
        yield Working(rest, arith, w.triang, w.simp + (names,)), frozenset()
        return

    tower_vars: list[str] = []
    for t in row:
        _, base = f_split(t, params)
        if isinstance(base, Var) and base.name not in tower_vars:
            tower_vars.append(base.name)

    f = params.zero_weight_unary
    heights = range(row_len + 1) if f is not None else range(1)
    shapes = [
        (name, m)
        for name in params.precedence
        if name != f
        for m in heights
    ]
    options = [shapes] * len(tower_vars)
    for combo in itertools.product(*options) if tower_vars else iter([()]):
        mapping: dict[str, Term] = {}
        triang_add: list[tuple[str, Term]] = []
        new_vars: set[str] = set()
        for x, (g, m) in zip(tower_vars, combo):
            sym = params.symbol(g)
            args = tuple(Var(fresh()) for _ in range(sym.arity))
            new_vars.update(a.name for a in args)
            guess = f_wrap(m, App(g, args), params)
            mapping[x] = guess
            triang_add.append((x, guess))
        new_row = [_subst_quasi(t, mapping, params) for t in row]
        guessed = Chain(
            tuple(new_row) + chain.terms[end:],
            chain.conns,
        )
        if tower_vars:
            trace(
                "shape guess: "
                + ", ".join(f"{x}:={g}@{m}" for x, (g, m) in zip(tower_vars, combo))
            )
        yield Working(guessed, w.arith, w.triang + tuple(triang_add), w.simp), frozenset(new_vars)


# --- lexicographic decomposition ------------------------------------------------


def lex_decompose(
    left: Term, right: Term, params: KboParams
) -> tuple[ArithAtom, tuple[tuple[TermAtom, ...], ...] | None] | None:
    """Decompose f^k(g(xs)) LEX f^m(h(ys)) into weight arithmetic + argument atoms.

    Returns None when the pair is unsatisfiable outright; otherwise the weight
    equation together with the per-position disjunction (None when the
    tower/precedence comparison already settles the lexicographic test).
    """
    k, g_base = f_split(left, params)
    m, h_base = f_split(right, params)
    if isinstance(g_base, Var) or isinstance(h_base, Var):
        raise ValueError("lex_decompose expects guessed (non-variable) bases")
    atom = ArithAtom(weight_of(g_base, params), weight_of(h_base, params), ArithRel.EQ)
    g, h = g_base.head, h_base.head
    if k < m or (k == m and params.prec_greater(h, g)):
        return None
    if k > m or (k == m and params.prec_greater(g, h)):
        return atom, None
    # equal tower and equal head: lexicographic comparison of the arguments
    disjuncts = []
    for i in range(len(g_base.args)):
        part = tuple(
            TermAtom(g_base.args[t], h_base.args[t], TermRel.EQ) for t in range(i)
        ) + (TermAtom(g_base.args[i], h_base.args[i], TermRel.SUCC),)
        disjuncts.append(part)
    if not disjuncts:
        return None  # identical constants cannot compare strictly
    return atom, tuple(disjuncts)


# --- residual variable discharge -------------------------------------------------


def discharge_variables(
    e_atoms: Sequence[TermAtom],
    new_vars: frozenset[str],
    params: KboParams,
    trace: Trace = _no_trace,
) -> Iterator[
    tuple[
        tuple[tuple[str, Term], ...],
        tuple[tuple[str, ...], ...],
        tuple[ArithAtom, ...],
        tuple[TermAtom, ...],
    ]
]:
    """Sort residual variable constraints into triangle/simple/chain material.

    Fresh variables equality-connected to an old variable are substituted away
    (triangle); components never reaching an old variable are rearranged into
    lexicographic chains for the simple part, with weight-strict steps
    contributing arithmetic; everything touching old variables funnels back to
    the chain part.
    """
    atoms: list[TermAtom] = []
    for a in e_atoms:
        if a.left == a.right:
            if a.rel is TermRel.EQ:
                continue
            return  # x above itself
        atoms.append(a)

    # union-find over equality edges
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        parent[find(a)] = find(b)

    names: list[str] = []
    for a in atoms:
        for side in (a.left, a.right):
            if side.name not in parent:  # type: ignore[union-attr]
                names.append(side.name)  # type: ignore[union-attr]
            find(side.name)  # type: ignore[union-attr]
    for a in atoms:
        if a.rel is TermRel.EQ:
            union(a.left.name, a.right.name)  # type: ignore[union-attr]

    # cycle check: a strict edge inside an equality class, or a directed cycle
    # among classes, has no solution
    edges: set[tuple[str, str]] = set()
    for a in atoms:
        if a.rel is TermRel.SUCC:
            ra, rb = find(a.left.name), find(a.right.name)  # type: ignore[union-attr]
            if ra == rb:
                return
            edges.add((ra, rb))
    graph: dict[str, list[str]] = {}
    for ra, rb in sorted(edges):
        graph.setdefault(ra, []).append(rb)
    color: dict[str, int] = {}

    def cyclic(v: str) -> bool:
        color[v] = 1
        for u in graph.get(v, ()):
            c = color.get(u, 0)
            if c == 1 or (c == 0 and cyclic(u)):
                return True
        color[v] = 2
        return False

    if any(color.get(v, 0) == 0 and cyclic(v) for v in graph):
        return

    old_of_class: dict[str, str] = {}
    for n in names:
        if n not in new_vars:
            old_of_class.setdefault(find(n), n)

    blue_map: dict[str, Term] = {}
    triang_add: list[tuple[str, Term]] = []
    for n in names:
        if n in new_vars and find(n) in old_of_class:
            rep = old_of_class[find(n)]
            blue_map[n] = Var(rep)
            triang_add.append((n, Var(rep)))
            trace(f"residual: {n} equated to {rep}")

    rewritten: list[TermAtom] = []
    for a in atoms:
        l = blue_map.get(a.left.name, a.left)  # type: ignore[union-attr]
        r = blue_map.get(a.right.name, a.right)  # type: ignore[union-attr]
        if l == r:
            if a.rel is TermRel.EQ:
                continue
            return
        rewritten.append(TermAtom(l, r, a.rel))

    # connected components over the remaining atoms (any edge direction)
    adj: dict[str, set[str]] = {}
    for a in rewritten:
        x, y = a.left.name, a.right.name  # type: ignore[union-attr]
        adj.setdefault(x, set()).add(y)
        adj.setdefault(y, set()).add(x)
    comp: dict[str, int] = {}
    order: list[str] = []
    for a in rewritten:
        for side in (a.left, a.right):
            if side.name not in order:  # type: ignore[union-attr]
                order.append(side.name)  # type: ignore[union-attr]
    cid = 0
    for n in order:
        if n in comp:
            continue
        stack = [n]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp[v] = cid
            stack.extend(adj.get(v, ()))
        cid += 1
    green_components = {
        c for c in range(cid) if all(v in new_vars for v in comp if comp[v] == c)
    }
    green_atoms = [
        a for a in rewritten if comp.get(a.left.name) in green_components  # type: ignore[union-attr]
    ]
    redold_atoms = tuple(
        a for a in rewritten if comp.get(a.left.name) not in green_components  # type: ignore[union-attr]
    )

    if not green_atoms:
        yield tuple(triang_add), (), (), redold_atoms
        return

    for green_chain in chain_branches(green_atoms, params):
        tri2 = list(triang_add)
        simp2: list[tuple[str, ...]] = []
        arith2: list[ArithAtom] = []
        terms = list(green_chain.terms)
        conns = list(green_chain.conns)
        # equalities collapse onto the kept (right) variable
        i = 0
        while i < len(conns):
            if conns[i] is Conn.EQ:
                tri2.append((terms[i].name, terms[i + 1]))  # type: ignore[union-attr]
                del terms[i]
                del conns[i]
            else:
                i += 1
        # split on weight-strict steps, keeping lexicographic runs
        seg: list[str] = [terms[0].name]  # type: ignore[union-attr]
        for i, c in enumerate(conns):
            nxt = terms[i + 1].name  # type: ignore[union-attr]
            if c is Conn.LEX:
                seg.append(nxt)
            else:
                if len(seg) > 1:
                    simp2.append(tuple(seg))
                arith2.append(
                    ArithAtom(
                        weight_of(Var(seg[-1]), params),
                        weight_of(Var(nxt), params),
                        ArithRel.GT,
                    )
                )
                seg = [nxt]
        if len(seg) > 1:
            simp2.append(tuple(seg))
        trace("residual: fresh-only component moved to simple part")
        yield tuple(tri2), tuple(simp2), tuple(arith2), redold_atoms


# --- the driving loop ------------------------------------------------------------


class Budget:
    """Branch counter shared across one solve; raises when exhausted."""

    def __init__(self, limit: int | None):
        self.limit = limit
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise ResourceLimitError(f"branch budget exceeded ({self.limit})")


class ResourceLimitError(RuntimeError):
    pass


def isolate(
    chained: Chain,
    arith_seed: Sequence[ArithAtom],
    params: KboParams,
    fresh: Callable[[], str],
    budget: Budget | None = None,
    trace: Trace = _no_trace,
) -> Iterator[IsolatedForm]:
    """Enumerate isolated forms whose disjunction covers the chained constraint.

    Depth-first with immediate pruning; the chain part strictly shrinks at
    every step.
    """
    budget = budget or Budget(None)

    def go(w: Working) -> Iterator[IsolatedForm]:
        budget.tick()
        if not w.chain.terms:
            yield IsolatedForm(w.arith, w.triang, w.simp)
            return
        cleaned = first_row_cleanup(w.chain, params)
        if cleaned is None:
            trace("first-row cleanup: unsatisfiable occurrence")
            return
        chain = cleaned
        start, end = _first_row(chain)
        if end - start == 1:
            arith = w.arith
            if end < len(chain.terms):
                arith = arith + (
                    ArithAtom(
                        weight_of(chain.terms[start], params),
                        weight_of(chain.terms[end], params),
                        ArithRel.GT,
                    ),
                )
            trace("single-entry row dropped to arithmetic")
            rest = Chain(chain.terms[end:], chain.conns[end:])
            yield from go(Working(rest, arith, w.triang, w.simp))
            return
        if any(c is Conn.EQ for c in chain.conns[start : end - 1]):
            w2 = eliminate_row_equalities(
                Working(chain, w.arith, w.triang, w.simp), params, trace
            )
            if w2 is None:
                return
            yield from go(w2)
            return

        old_size = chain.size()
        row_len = end - start
        for guessed, new_vars in guess_shapes(
            Working(chain, w.arith, w.triang, w.simp), row_len, params, fresh, trace
        ):
            if not new_vars and len(guessed.chain.terms) < len(chain.terms):
                # pure-variable row already discharged
                yield from go(guessed)
                continue
            gchain = guessed.chain
            gstart, gend = 0, row_len
            row = gchain.terms[gstart:gend]
            arith_add: list[ArithAtom] = []
            disjunctions: list[tuple[tuple[TermAtom, ...], ...]] = []
            dead = False
            for i in range(row_len - 1):
                dec = lex_decompose(row[i], row[i + 1], params)
                if dec is None:
                    dead = True
                    break
                atom, disj = dec
                arith_add.append(atom)
                if disj is not None:
                    disjunctions.append(disj)
            if dead:
                continue
            if gend < len(gchain.terms):
                arith_add.append(
                    ArithAtom(
                        weight_of(row[-1], params),
                        weight_of(gchain.terms[gend], params),
                        ArithRel.GT,
                    )
                )
            rest = Chain(gchain.terms[gend:], gchain.conns[gend:])
            for combo in itertools.product(*disjunctions):
                budget.tick()
                e_atoms = [atom for part in combo for atom in part]
                for tri2, simp2, arith2, redold in discharge_variables(
                    e_atoms, new_vars, params, trace
                ):
                    rechain_atoms = rest.atoms() + list(redold)
                    for rc in chain_branches(
                        rechain_atoms, params, extra_terms=rest.terms, tick=budget.tick
                    ):
                        if rc.size() >= old_size:
                            raise AssertionError("chain size did not decrease")
                        yield from go(
                            Working(
                                rc,
                                guessed.arith + tuple(arith_add) + arith2,
                                guessed.triang + tri2,
                                guessed.simp + simp2,
                            )
                        )

    yield from go(Working(chained, tuple(arith_seed), (), ()))
