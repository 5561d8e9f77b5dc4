"""Constraint formulas: atoms over terms and weights under NOT/AND/OR.

Surface syntax uses ``>`` for the order, ``=`` for term equality, ``>w`` and
``>lex`` for the weight-strict and weight-equal fragments, and ``w(t)`` for
term weight inside arithmetic atoms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .terms import (
    App,
    Comparison,
    KboParams,
    Term,
    Var,
    WeightExpr,
    format_term,
    ground_weight,
    kbo_compare,
    weight_of,
)


class TermRel(enum.Enum):
    SUCC = ">"
    EQ = "="
    SUCC_W = ">w"
    SUCC_LEX = ">lex"


class ArithRel(enum.Enum):
    GT = ">"
    GE = ">="
    EQ = "="


@dataclass(frozen=True)
class TermAtom:
    left: Term
    right: Term
    rel: TermRel


@dataclass(frozen=True)
class ArithAtom:
    left: WeightExpr
    right: WeightExpr
    rel: ArithRel


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


Atom = Union[TermAtom, ArithAtom]
Formula = Union[TermAtom, ArithAtom, Not, And, Or]

TRUE = And(())
FALSE = Or(())


def conj(parts) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


def formula_vars(f: Formula) -> tuple[str, ...]:
    """Free variables in first-occurrence order."""
    seen: dict[str, None] = {}

    def walk(g: Formula) -> None:
        if isinstance(g, TermAtom):
            for t in (g.left, g.right):
                stack = [t]
                while stack:
                    u = stack.pop()
                    if isinstance(u, Var):
                        seen.setdefault(u.name, None)
                    else:
                        stack.extend(reversed(u.args))
        elif isinstance(g, ArithAtom):
            for e in (g.left, g.right):
                for v, _ in e.coeffs:
                    seen.setdefault(v, None)
        elif isinstance(g, Not):
            walk(g.arg)
        else:
            for p in g.parts:
                walk(p)

    walk(f)
    return tuple(seen)


# --- parsing ----------------------------------------------------------------


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class ArityMismatchError(ValueError):
    pass


_OPS = ("(", ")", ",", "+", "&", "|", "!", ">=", ">lex", ">w", ">", "=")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            toks.append(("ident", text[i:j], i))
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("nat", text[i:j], i))
            i = j
            continue
        for op in _OPS:
            if text.startswith(op, i):
                # ">w"/" >lex" bind only when not immediately continuing into an
                # identifier or call, so "x > w(y)" keeps its "w(".
                if op in (">w", ">lex"):
                    j = i + len(op)
                    if j < n and (text[j].isalnum() or text[j] in "_('"):
                        continue
                toks.append(("op", op, i))
                i += len(op)
                break
        else:
            raise FormulaSyntaxError(f"unexpected character {ch!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, params: KboParams):
        self.toks = _tokenize(text)
        self.pos = 0
        self.params = params

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.pos]

    def take(self, kind: str, value: str | None = None) -> tuple[str, str, int]:
        k, v, p = self.toks[self.pos]
        if k != kind or (value is not None and v != value):
            want = value or kind
            raise FormulaSyntaxError(f"expected {want!r}, found {v or 'end of input'!r}", p)
        self.pos += 1
        return k, v, p

    def at_op(self, value: str) -> bool:
        k, v, _ = self.peek()
        return k == "op" and v == value

    def parse_formula(self) -> Formula:
        f = self.parse_disj()
        k, v, p = self.peek()
        if k != "end":
            raise FormulaSyntaxError(f"unexpected trailing input {v!r}", p)
        return f

    def parse_disj(self) -> Formula:
        parts = [self.parse_conj()]
        while self.at_op("|"):
            self.take("op", "|")
            parts.append(self.parse_conj())
        return disj(parts)

    def parse_conj(self) -> Formula:
        parts = [self.parse_lit()]
        while self.at_op("&"):
            self.take("op", "&")
            parts.append(self.parse_lit())
        return conj(parts)

    def parse_lit(self) -> Formula:
        if self.at_op("!"):
            self.take("op", "!")
            return Not(self.parse_lit())
        if self.at_op("("):
            # A '(' here opens a grouped formula; weight expressions never
            # start with '(' in this grammar.
            self.take("op", "(")
            f = self.parse_disj()
            self.take("op", ")")
            return f
        return self.parse_atom()

    def _at_wexpr(self) -> bool:
        k, v, _ = self.peek()
        if k == "nat":
            return True
        if k == "ident" and v == "w":
            nk, nv, _ = self.toks[self.pos + 1]
            return nk == "op" and nv == "("
        return False

    def parse_atom(self) -> Formula:
        if self._at_wexpr():
            left = self.parse_wexpr()
            rel = self.parse_arith_rel()
            right = self.parse_wexpr()
            return ArithAtom(left, right, rel)
        left = self.parse_term()
        k, v, p = self.peek()
        if k != "op" or v not in (">", "=", ">w", ">lex"):
            raise FormulaSyntaxError("expected a comparison operator", p)
        self.pos += 1
        if self._at_wexpr():
            raise FormulaSyntaxError("cannot compare a term with a weight expression", self.peek()[2])
        right = self.parse_term()
        return TermAtom(left, right, TermRel(v))

    def parse_arith_rel(self) -> ArithRel:
        k, v, p = self.peek()
        if k == "op" and v in (">", ">=", "="):
            self.pos += 1
            return ArithRel(v)
        raise FormulaSyntaxError("expected '>', '>=' or '=' between weight expressions", p)

    def parse_wexpr(self) -> WeightExpr:
        expr = self.parse_wexpr_item()
        while self.at_op("+"):
            self.take("op", "+")
            expr = expr.add(self.parse_wexpr_item())
        return expr

    def parse_wexpr_item(self) -> WeightExpr:
        k, v, p = self.peek()
        if k == "nat":
            self.pos += 1
            return WeightExpr.of(int(v))
        if k == "ident" and v == "w":
            self.pos += 1
            self.take("op", "(")
            t = self.parse_term()
            self.take("op", ")")
            return weight_of(t, self.params)
        raise FormulaSyntaxError("expected 'w(term)' or a natural number", p)

    def parse_term(self) -> Term:
        k, name, p = self.take("ident")
        if name == "w" and self.at_op("("):
            raise FormulaSyntaxError("'w' is reserved for weight expressions", p)
        if self.at_op("("):
            self.take("op", "(")
            args = [self.parse_term()]
            while self.at_op(","):
                self.take("op", ",")
                args.append(self.parse_term())
            self.take("op", ")")
            sym = self.params.by_name.get(name)
            if sym is None:
                raise FormulaSyntaxError(f"unknown function symbol {name!r}", p)
            if sym.arity != len(args):
                raise ArityMismatchError(
                    f"{name} has arity {sym.arity}, applied to {len(args)} arguments"
                )
            return App(name, tuple(args))
        sym = self.params.by_name.get(name)
        if sym is not None:
            if sym.arity != 0:
                raise ArityMismatchError(f"{name} has arity {sym.arity}, used without arguments")
            return App(name)
        return Var(name)


def parse_formula(text: str, params: KboParams) -> Formula:
    return _Parser(text, params).parse_formula()


def parse_term(text: str, params: KboParams) -> Term:
    parser = _Parser(text, params)
    t = parser.parse_term()
    k, v, p = parser.peek()
    if k != "end":
        raise FormulaSyntaxError(f"unexpected trailing input {v!r}", p)
    return t


# --- printing ---------------------------------------------------------------


def format_wexpr(e: WeightExpr) -> str:
    parts = []
    for v, c in e.coeffs:
        parts.extend([f"w({v})"] * c)
    if e.constant or not parts:
        parts.append(str(e.constant))
    return " + ".join(parts)


def format_formula(f: Formula) -> str:
    def fmt(g: Formula, parent: str) -> str:
        if isinstance(g, TermAtom):
            return f"{format_term(g.left)} {g.rel.value} {format_term(g.right)}"
        if isinstance(g, ArithAtom):
            return f"{format_wexpr(g.left)} {g.rel.value} {format_wexpr(g.right)}"
        if isinstance(g, Not):
            return "!" + fmt(g.arg, "not")
        if isinstance(g, And):
            if not g.parts:
                return "true"
            body = " & ".join(fmt(p, "and") for p in g.parts)
            return f"({body})" if parent == "not" or (parent == "and" and len(g.parts) > 1) else body
        if not g.parts:
            return "false"
        body = " | ".join(fmt(p, "or") for p in g.parts)
        return f"({body})" if parent in ("and", "not") or len(g.parts) > 1 and parent == "or" else body

    return fmt(f, "top")


# --- semantics --------------------------------------------------------------


def eval_ground_atom(atom: Atom, params: KboParams) -> bool:
    if isinstance(atom, ArithAtom):
        lv, rv = atom.left.constant, atom.right.constant
        if atom.left.coeffs or atom.right.coeffs:
            raise ValueError("atom is not ground")
        if atom.rel is ArithRel.GT:
            return lv > rv
        if atom.rel is ArithRel.GE:
            return lv >= rv
        return lv == rv
    lt, rt = atom.left, atom.right
    if atom.rel is TermRel.EQ:
        return lt == rt
    if atom.rel is TermRel.SUCC_W:
        return ground_weight(lt, params) > ground_weight(rt, params)
    if atom.rel is TermRel.SUCC_LEX:
        return (
            ground_weight(lt, params) == ground_weight(rt, params)
            and kbo_compare(lt, rt, params) is Comparison.GT
        )
    return kbo_compare(lt, rt, params) is Comparison.GT


def evaluate(f: Formula, subst: Mapping[str, Term], params: KboParams) -> bool:
    """Evaluate a formula under a grounding substitution."""
    from .terms import substitute

    if isinstance(f, TermAtom):
        return eval_ground_atom(
            TermAtom(substitute(f.left, subst), substitute(f.right, subst), f.rel), params
        )
    if isinstance(f, ArithAtom):
        weights = {
            v: ground_weight(subst[v], params)
            for e in (f.left, f.right)
            for v, _ in e.coeffs
        }
        lv = f.left.evaluate(weights)
        rv = f.right.evaluate(weights)
        return lv > rv if f.rel is ArithRel.GT else lv >= rv if f.rel is ArithRel.GE else lv == rv
    if isinstance(f, Not):
        return not evaluate(f.arg, subst, params)
    if isinstance(f, And):
        return all(evaluate(p, subst, params) for p in f.parts)
    return any(evaluate(p, subst, params) for p in f.parts)


# --- negation elimination and DNF -------------------------------------------


def eliminate_negations(f: Formula) -> Formula:
    """Rewrite to a NOT-free equivalent, using totality of both orders."""

    def pos(g: Formula) -> Formula:
        if isinstance(g, (TermAtom, ArithAtom)):
            return g
        if isinstance(g, And):
            return And(tuple(pos(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(pos(p) for p in g.parts))
        return neg(g.arg)

    def neg(g: Formula) -> Formula:
        if isinstance(g, Not):
            return pos(g.arg)
        if isinstance(g, And):
            return Or(tuple(neg(p) for p in g.parts))
        if isinstance(g, Or):
            return And(tuple(neg(p) for p in g.parts))
        if isinstance(g, TermAtom):
            s, t = g.left, g.right
            if g.rel is TermRel.SUCC:
                return Or((TermAtom(s, t, TermRel.EQ), TermAtom(t, s, TermRel.SUCC)))
            if g.rel is TermRel.EQ:
                return Or((TermAtom(s, t, TermRel.SUCC), TermAtom(t, s, TermRel.SUCC)))
            if g.rel is TermRel.SUCC_W:
                # not(|s| > |t|)  <=>  |s| = |t|  or  |t| > |s|
                return Or(
                    (
                        TermAtom(s, t, TermRel.SUCC_LEX),
                        TermAtom(s, t, TermRel.EQ),
                        TermAtom(t, s, TermRel.SUCC),
                    )
                )
            # not(s >lex t)  <=>  s = t  or  t > s  or  s >w t
            return Or(
                (
                    TermAtom(s, t, TermRel.EQ),
                    TermAtom(t, s, TermRel.SUCC),
                    TermAtom(s, t, TermRel.SUCC_W),
                )
            )
        if g.rel is ArithRel.GT:
            return Or((ArithAtom(g.left, g.right, ArithRel.EQ), ArithAtom(g.right, g.left, ArithRel.GT)))
        if g.rel is ArithRel.EQ:
            return Or((ArithAtom(g.left, g.right, ArithRel.GT), ArithAtom(g.right, g.left, ArithRel.GT)))
        return ArithAtom(g.right, g.left, ArithRel.GT)

    return pos(f)


Constraint = tuple[Atom, ...]


def to_dnf_constraints(f: Formula) -> Iterator[Constraint]:
    """Enumerate conjunctive branches of a NOT-free formula, lazily.

    Every order atom splits into its weight-strict and weight-equal parts, so
    each emitted constraint contains no SUCC atoms.
    """

    def branches(g: Formula) -> Iterator[tuple[Atom, ...]]:
        if isinstance(g, TermAtom):
            if g.rel is TermRel.SUCC:
                yield (TermAtom(g.left, g.right, TermRel.SUCC_W),)
                yield (TermAtom(g.left, g.right, TermRel.SUCC_LEX),)
            else:
                yield (g,)
        elif isinstance(g, ArithAtom):
            yield (g,)
        elif isinstance(g, Not):
            raise ValueError("formula must be NOT-free; run eliminate_negations first")
        elif isinstance(g, And):
            def product(parts: tuple[Formula, ...]) -> Iterator[tuple[Atom, ...]]:
                if not parts:
                    yield ()
                    return
                for head in branches(parts[0]):
                    for rest in product(parts[1:]):
                        yield head + rest

            yield from product(g.parts)
        else:
            for p in g.parts:
                yield from branches(p)

    return branches(f)
