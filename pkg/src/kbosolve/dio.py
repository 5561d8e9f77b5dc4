"""Encoding linear Diophantine systems as ordering constraints.

Over the fixed signature {h/2, g/1, s/1, c/0} with all weights 1 and
h > g > s > c, the pair of atoms g(x) > s(y) & g(y) > s(x) holds exactly on
equal-weight pairs, and s(x) > g(y) exactly on weight-greater pairs.  Reading
a ground term t as the number |t| - 1 turns x1 + ... + xn + k = x0 into one
equal-weight constraint per equation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .formulas import And, Formula, TermAtom, TermRel, conj
from .terms import App, KboParams, Symbol, Term, Var, ground_weight, validate_params


class MalformedEquationError(ValueError):
    pass


@dataclass(frozen=True)
class DioEquation:
    """x_1 + ... + x_n + constant = target, over pairwise distinct variables."""

    summands: tuple[str, ...]
    constant: int
    target: str

    def __post_init__(self) -> None:
        if not self.summands:
            raise MalformedEquationError("at least one summand variable is required")
        if len(set(self.summands)) != len(self.summands):
            raise MalformedEquationError("summand variables must be pairwise different")
        if self.target in self.summands:
            raise MalformedEquationError("target variable must differ from the summands")
        if self.constant < 0:
            raise MalformedEquationError("constant must be a natural number")

    def holds(self, values: Mapping[str, int]) -> bool:
        return sum(values[v] for v in self.summands) + self.constant == values[self.target]


def encoding_params() -> KboParams:
    return validate_params(
        [Symbol("h", 2, 1), Symbol("g", 1, 1), Symbol("s", 1, 1), Symbol("c", 0, 1)],
        ["h", "g", "s", "c"],
    )


def _s_tower(k: int, base: Term) -> Term:
    for _ in range(k):
        base = App("s", (base,))
    return base


def _h_nest(vars_: Sequence[str]) -> Term:
    terms: list[Term] = [Var(v) for v in vars_]
    nest = terms[-1]
    for t in reversed(terms[:-1]):
        nest = App("h", (t, nest))
    return nest


def gadget_equal_weight(x: Term, y: Term) -> Formula:
    return And(
        (
            TermAtom(App("g", (x,)), App("s", (y,)), TermRel.SUCC),
            TermAtom(App("g", (y,)), App("s", (x,)), TermRel.SUCC),
        )
    )


def gadget_greater_weight(x: Term, y: Term) -> Formula:
    return TermAtom(App("s", (x,)), App("g", (y,)), TermRel.SUCC)


def encode_equation(eq: DioEquation) -> Formula:
    n = len(eq.summands)
    left = _s_tower(eq.constant + 2, _h_nest(eq.summands))
    right = _s_tower(2 * n, Var(eq.target))
    return gadget_equal_weight(left, right)


def encode_dio(system: Sequence[DioEquation]) -> tuple[KboParams, Formula]:
    """One equal-weight gadget per equation, over shared variables.

    The result is satisfiable iff the system has a solution in the naturals;
    a solving substitution decodes via value(t) = |t| - 1.
    """
    if not system:
        raise MalformedEquationError("empty system")
    return encoding_params(), conj(encode_equation(eq) for eq in system)


def decode_witness(witness: Mapping[str, Term], params: KboParams | None = None) -> dict[str, int]:
    p = params or encoding_params()
    return {v: ground_weight(t, p) - 1 for v, t in witness.items()}


_EQ_RE = re.compile(r"^(?P<lhs>[^=]+)=(?P<rhs>.+)$")


def parse_dio_system(text: str) -> list[DioEquation]:
    """Parse `x1 + x2 + 3 = x0; ...`; at most one constant addend (0 implied)."""
    out = []
    for raw in text.split(";"):
        part = raw.strip()
        if not part:
            continue
        m = _EQ_RE.match(part)
        if m is None:
            raise MalformedEquationError(f"missing '=' in {part!r}")
        target = m.group("rhs").strip()
        if not target.isidentifier():
            raise MalformedEquationError(f"right-hand side must be a single variable: {target!r}")
        summands: list[str] = []
        constant: int | None = None
        for addend in m.group("lhs").split("+"):
            a = addend.strip()
            if not a:
                raise MalformedEquationError(f"empty addend in {part!r}")
            if a.isdigit():
                if constant is not None:
                    raise MalformedEquationError("at most one constant addend is allowed")
                constant = int(a)
            elif a.isidentifier():
                summands.append(a)
            else:
                raise MalformedEquationError(f"bad addend {a!r}")
        out.append(DioEquation(tuple(summands), constant or 0, target))
    if not out:
        raise MalformedEquationError("empty system")
    return out
