"""Signatures, terms, weights, and the ground-term comparator.

The order compares ground terms by total weight first, then by head-symbol
precedence, then argument-by-argument.  Its two parameters (a weight function
and a precedence) are bundled and validated in :class:`KboParams`; everything
downstream assumes a validated parameter object.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union


class Comparison(enum.Enum):
    GT = "GT"
    EQ = "EQ"
    LT = "LT"


class SigProblem(enum.Enum):
    """Validation diagnostics for signature + precedence input."""

    NO_CONSTANT = "NoConstant"
    ZERO_WEIGHT_CONSTANT = "ZeroWeightConstant"
    TWO_ZERO_WEIGHT_UNARIES = "TwoZeroWeightUnaries"
    INCOMPATIBLE_PRECEDENCE = "IncompatiblePrecedence"
    NOT_TOTAL_ORDER = "NotTotalOrder"


class SignatureError(ValueError):
    """Raised with one diagnostic per violated validity condition."""

    def __init__(self, diagnostics: Sequence[tuple[SigProblem, str]]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(f"{p.value}: {m}" for p, m in self.diagnostics))

    def codes(self) -> set[SigProblem]:
        return {p for p, _ in self.diagnostics}


class UnknownSymbolError(KeyError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    weight: int


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True)
class App:
    head: str
    args: tuple["Term", ...] = ()

    def __repr__(self) -> str:
        if not self.args:
            return f"App({self.head!r})"
        return f"App({self.head!r}, {self.args!r})"


Term = Union[Var, App]


@dataclass(frozen=True)
class KboParams:
    """Validated signature (in declaration order) plus total precedence.

    ``precedence`` lists symbol names greatest-first.  At most one unary
    symbol may have weight 0; when present it must be the greatest symbol.
    """

    symbols: tuple[Symbol, ...]
    precedence: tuple[str, ...]

    @cached_property
    def by_name(self) -> Mapping[str, Symbol]:
        return {s.name: s for s in self.symbols}

    @cached_property
    def prec_index(self) -> Mapping[str, int]:
        # 0 is the greatest symbol.
        return {name: i for i, name in enumerate(self.precedence)}

    @cached_property
    def zero_weight_unary(self) -> str | None:
        for s in self.symbols:
            if s.arity == 1 and s.weight == 0:
                return s.name
        return None

    @cached_property
    def constants(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.arity == 0)

    def symbol(self, name: str) -> Symbol:
        try:
            return self.by_name[name]
        except KeyError:
            raise UnknownSymbolError(name) from None

    def prec_greater(self, a: str, b: str) -> bool:
        return self.prec_index[a] < self.prec_index[b]

    def is_constants_only(self) -> bool:
        return all(s.arity == 0 for s in self.symbols)


def validate_params(
    symbols: Iterable[Symbol | tuple[str, int, int]],
    precedence: Sequence[str],
) -> KboParams:
    """Check the two validity conditions on the order's parameters.

    Collects every violation instead of stopping at the first, so a bad
    signature file yields one diagnostic per problem.
    """
    syms: list[Symbol] = []
    problems: list[tuple[SigProblem, str]] = []
    seen: set[str] = set()
    for raw in symbols:
        s = raw if isinstance(raw, Symbol) else Symbol(*raw)
        if s.name in seen:
            problems.append((SigProblem.NOT_TOTAL_ORDER, f"symbol {s.name} declared twice"))
        seen.add(s.name)
        if s.arity < 0 or s.weight < 0:
            problems.append((SigProblem.NOT_TOTAL_ORDER, f"negative arity/weight for {s.name}"))
        syms.append(s)

    if not any(s.arity == 0 for s in syms):
        problems.append((SigProblem.NO_CONSTANT, "signature declares no constant"))
    for s in syms:
        if s.arity == 0 and s.weight == 0:
            problems.append((SigProblem.ZERO_WEIGHT_CONSTANT, f"constant {s.name} has weight 0"))
    zero_unaries = [s.name for s in syms if s.arity == 1 and s.weight == 0]
    if len(zero_unaries) > 1:
        problems.append(
            (SigProblem.TWO_ZERO_WEIGHT_UNARIES, f"weight-0 unaries: {', '.join(zero_unaries)}")
        )

    names = {s.name for s in syms}
    prec = tuple(precedence)
    if sorted(prec) != sorted(names):
        problems.append(
            (SigProblem.NOT_TOTAL_ORDER, "precedence must list each declared symbol exactly once")
        )
    elif zero_unaries and prec and prec[0] != zero_unaries[0] and len(zero_unaries) == 1:
        problems.append(
            (
                SigProblem.INCOMPATIBLE_PRECEDENCE,
                f"weight-0 unary {zero_unaries[0]} must be the greatest symbol",
            )
        )

    if problems:
        raise SignatureError(problems)
    return KboParams(tuple(syms), prec)


# --- term utilities ---------------------------------------------------------


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    return all(is_ground(a) for a in t.args)


def term_vars(t: Term) -> Iterator[str]:
    """Variable names in left-to-right occurrence order (with repeats)."""
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from term_vars(a)


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def is_proper_subterm(s: Term, t: Term) -> bool:
    return s != t and any(s == u for u in subterms(t))


def substitute(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if not t.args:
        return t
    return App(t.head, tuple(substitute(a, mapping) for a in t.args))


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.head
    return f"{t.head}({','.join(format_term(a) for a in t.args)})"


# --- weights ----------------------------------------------------------------


@dataclass(frozen=True)
class WeightExpr:
    """Symbolic weight of a (possibly non-ground) term.

    ``constant`` sums the symbol weights over all non-variable nodes; the
    coefficient of a variable is its occurrence count.  Evaluating at any
    assignment of positive naturals is positive, since ground weights are.
    """

    constant: int
    coeffs: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def of(constant: int, coeffs: Mapping[str, int] | None = None) -> "WeightExpr":
        items = tuple(sorted((v, c) for v, c in (coeffs or {}).items() if c != 0))
        return WeightExpr(constant, items)

    @property
    def coeff_map(self) -> dict[str, int]:
        return dict(self.coeffs)

    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def add(self, other: "WeightExpr") -> "WeightExpr":
        m = self.coeff_map
        for v, c in other.coeffs:
            m[v] = m.get(v, 0) + c
        return WeightExpr.of(self.constant + other.constant, m)

    def add_const(self, k: int) -> "WeightExpr":
        return WeightExpr(self.constant + k, self.coeffs)

    def evaluate(self, weights: Mapping[str, int]) -> int:
        return self.constant + sum(c * weights[v] for v, c in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs


def weight_of(t: Term, params: KboParams) -> WeightExpr:
    const = 0
    coeffs: dict[str, int] = {}
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            coeffs[u.name] = coeffs.get(u.name, 0) + 1
        else:
            const += params.symbol(u.head).weight
            stack.extend(u.args)
    return WeightExpr.of(const, coeffs)


def ground_weight(t: Term, params: KboParams, _memo: dict[int, int] | None = None) -> int:
    memo: dict[int, int] = {} if _memo is None else _memo
    key = id(t)
    cached = memo.get(key)
    if cached is not None:
        return cached
    if isinstance(t, Var):
        raise ValueError(f"weight of non-ground term (variable {t.name})")
    w = params.symbol(t.head).weight + sum(ground_weight(a, params, memo) for a in t.args)
    memo[key] = w
    return w


def kbo_compare(s: Term, t: Term, params: KboParams) -> Comparison:
    """Total comparison of two ground terms; EQ only on syntactic equality."""
    memo: dict[int, int] = {}

    def cmp(a: App, b: App) -> Comparison:
        if a == b:
            return Comparison.EQ
        wa = ground_weight(a, params, memo)
        wb = ground_weight(b, params, memo)
        if wa > wb:
            return Comparison.GT
        if wa < wb:
            return Comparison.LT
        if a.head != b.head:
            return Comparison.GT if params.prec_greater(a.head, b.head) else Comparison.LT
        for x, y in zip(a.args, b.args):
            c = cmp(x, y)
            if c is not Comparison.EQ:
                return c
        return Comparison.EQ

    if not (isinstance(s, App) and isinstance(t, App)):
        raise ValueError("kbo_compare requires ground terms")
    return cmp(s, t)


# --- f-metrics and contents -------------------------------------------------


def f_height(t: Term, params: KboParams) -> int:
    f = params.zero_weight_unary
    n = 0
    while isinstance(t, App) and t.head == f and f is not None:
        n += 1
        t = t.args[0]
    return n


def f_split(t: Term, params: KboParams) -> tuple[int, Term]:
    """Decompose a term into its leading zero-weight-unary tower and base."""
    f = params.zero_weight_unary
    n = 0
    while f is not None and isinstance(t, App) and t.head == f:
        n += 1
        t = t.args[0]
    return n, t


def f_wrap(k: int, base: Term, params: KboParams) -> Term:
    f = params.zero_weight_unary
    if k and f is None:
        raise ValueError("no zero-weight unary symbol in signature")
    for _ in range(k):
        base = App(f, (base,))  # type: ignore[arg-type]
    return base


def f_metrics(s: Term, t: Term, params: KboParams) -> tuple[int, int, int]:
    hs = f_height(s, params)
    ht = f_height(t, params)
    return hs, ht, hs - ht


def contents_of(t: Term, params: KboParams) -> tuple[int, ...]:
    """Per-symbol occurrence counts, indexed by declaration order."""
    index = {s.name: i for i, s in enumerate(params.symbols)}
    counts = [0] * len(params.symbols)
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            raise ValueError("contents of non-ground term")
        try:
            counts[index[u.head]] += 1
        except KeyError:
            raise UnknownSymbolError(u.head) from None
        stack.extend(u.args)
    return tuple(counts)


# --- signature files --------------------------------------------------------


class SignatureSyntaxError(ValueError):
    pass


def parse_signature(text: str) -> KboParams:
    """Parse the line-oriented signature format.

    ``symbol <name> <arity> <weight>`` declares one symbol; a single
    ``precedence a > b > ... > z`` line lists all symbols greatest-first.
    ``#`` starts a comment.
    """
    symbols: list[Symbol] = []
    precedence: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "symbol":
            if len(parts) != 4:
                raise SignatureSyntaxError(f"line {lineno}: expected 'symbol <name> <arity> <weight>'")
            name = parts[1]
            try:
                arity, weight = int(parts[2]), int(parts[3])
            except ValueError:
                raise SignatureSyntaxError(f"line {lineno}: arity and weight must be integers") from None
            symbols.append(Symbol(name, arity, weight))
        elif parts[0] == "precedence":
            if precedence is not None:
                raise SignatureSyntaxError(f"line {lineno}: duplicate precedence directive")
            rest = line[len("precedence") :]
            names = [p.strip() for p in rest.split(">")]
            if any(not n for n in names):
                raise SignatureSyntaxError(f"line {lineno}: malformed precedence chain")
            precedence = names
        else:
            raise SignatureSyntaxError(f"line {lineno}: unknown directive {parts[0]!r}")
    if precedence is None:
        raise SignatureSyntaxError("missing precedence directive")
    return validate_params(symbols, precedence)


def load_signature(path: str) -> KboParams:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_signature(fh.read())
