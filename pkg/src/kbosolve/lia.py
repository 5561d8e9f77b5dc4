"""Linear equations and inequalities over the naturals, with witnesses.

The decision path is exact integer arithmetic as far as it goes: unit-pivot
elimination of equalities (with gcd checks), interval propagation, and an
exhaustive lexicographic search when every variable ends up bounded with a
small domain.  Residual systems go to scipy's MILP solver (HiGHS); returned
points are re-verified with exact arithmetic and made deterministic by
minimizing variables one at a time in name order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import islice
from typing import Callable, Iterator, Mapping, Sequence


class SolverLimitError(RuntimeError):
    """The backend could not settle the system within its limits."""


@dataclass(frozen=True)
class LinExpr:
    constant: int
    coeffs: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def of(constant: int, coeffs: Mapping[str, int] | None = None) -> "LinExpr":
        items = tuple(sorted((v, c) for v, c in (coeffs or {}).items() if c != 0))
        return LinExpr(constant, items)

    @staticmethod
    def var(name: str) -> "LinExpr":
        return LinExpr(0, ((name, 1),))

    def coeff_map(self) -> dict[str, int]:
        return dict(self.coeffs)

    def rename(self, mapping: Mapping[str, str]) -> "LinExpr":
        out: dict[str, int] = {}
        for v, c in self.coeffs:
            name = mapping.get(v, v)
            out[name] = out.get(name, 0) + c
        return LinExpr.of(self.constant, out)

    def evaluate(self, values: Mapping[str, int]) -> int:
        return self.constant + sum(c * values[v] for v, c in self.coeffs)


class LinRel(enum.Enum):
    EQ = "="
    GT = ">"
    GE = ">="


@dataclass(frozen=True)
class LinAtom:
    left: LinExpr
    rel: LinRel
    right: LinExpr

    def rename(self, mapping: Mapping[str, str]) -> "LinAtom":
        return LinAtom(self.left.rename(mapping), self.rel, self.right.rename(mapping))

    def holds(self, values: Mapping[str, int]) -> bool:
        l, r = self.left.evaluate(values), self.right.evaluate(values)
        return l == r if self.rel is LinRel.EQ else l > r if self.rel is LinRel.GT else l >= r


@dataclass(frozen=True)
class LinConst:
    value: bool


@dataclass(frozen=True)
class LinAnd:
    parts: tuple["LinFormula", ...]


@dataclass(frozen=True)
class LinOr:
    parts: tuple["LinFormula", ...]


@dataclass(frozen=True)
class LinExists:
    names: tuple[str, ...]
    body: "LinFormula"


LinFormula = "LinAtom | LinConst | LinAnd | LinOr | LinExists"

LIN_TRUE = LinConst(True)
LIN_FALSE = LinConst(False)


@dataclass(frozen=True)
class LinSystem:
    atoms: tuple[LinAtom, ...]

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for a in self.atoms:
            for e in (a.left, a.right):
                for v, _ in e.coeffs:
                    seen.setdefault(v, None)
        return tuple(seen)


def format_formula(f) -> str:
    if isinstance(f, LinAtom):
        return f"{format_expr(f.left)} {f.rel.value} {format_expr(f.right)}"
    if isinstance(f, LinConst):
        return "true" if f.value else "false"
    if isinstance(f, LinAnd):
        return "(" + " & ".join(format_formula(p) for p in f.parts) + ")" if f.parts else "true"
    if isinstance(f, LinOr):
        return "(" + " | ".join(format_formula(p) for p in f.parts) + ")" if f.parts else "false"
    return "(exists " + " ".join(f.names) + ": " + format_formula(f.body) + ")"


def format_expr(e: LinExpr) -> str:
    parts = []
    for v, c in e.coeffs:
        parts.append(v if c == 1 else f"{c}*{v}")
    if e.constant or not parts:
        parts.append(str(e.constant))
    return " + ".join(parts)


def expand_to_systems(
    formula, fresh: Callable[[], str]
) -> Iterator[LinSystem]:
    """Lazily enumerate the conjunctive systems of a disjunctive formula.

    Existentially bound names are renamed apart, so each instantiation of a
    shared template gets its own variables.
    """

    def rec(f, renaming: dict[str, str]) -> Iterator[tuple[LinAtom, ...]]:
        if isinstance(f, LinAtom):
            yield (f.rename(renaming) if renaming else f,)
        elif isinstance(f, LinConst):
            if f.value:
                yield ()
        elif isinstance(f, LinAnd):
            def product(parts) -> Iterator[tuple[LinAtom, ...]]:
                if not parts:
                    yield ()
                    return
                for head in rec(parts[0], renaming):
                    for rest in product(parts[1:]):
                        yield head + rest

            yield from product(f.parts)
        elif isinstance(f, LinOr):
            for p in f.parts:
                yield from rec(p, renaming)
        else:
            inner = dict(renaming)
            for n in f.names:
                inner[n] = fresh()
            yield from rec(f.body, inner)

    for atoms in rec(formula, {}):
        yield LinSystem(atoms)


# --- decision procedure -------------------------------------------------------

# Internal constraint form: (coeffs dict, const, is_eq) meaning
#   sum(coeffs[v] * v) + const  == 0   (is_eq)
#   sum(coeffs[v] * v) + const  >= 0   (otherwise)

_Row = tuple[dict[str, int], int, bool]
_SEARCH_CAP = 200_000


def _normalize(atoms: Sequence[LinAtom]) -> list[_Row]:
    rows: list[_Row] = []
    for a in atoms:
        coeffs = a.left.coeff_map()
        for v, c in a.right.coeffs:
            coeffs[v] = coeffs.get(v, 0) - c
        const = a.left.constant - a.right.constant
        if a.rel is LinRel.GT:
            const -= 1
        coeffs = {v: c for v, c in coeffs.items() if c}
        rows.append((coeffs, const, a.rel is LinRel.EQ))
    return rows


def _row_range(
    coeffs: dict[str, int], const: int, bounds: dict[str, tuple[int, int | None]]
) -> tuple[int | None, int | None]:
    """Possible value range of the row over the bound box; None is infinite."""
    lo: int | None = const
    hi: int | None = const
    for v, c in coeffs.items():
        vlo, vhi = bounds[v]
        if c > 0:
            lo = lo + c * vlo if lo is not None else None
            hi = hi + c * vhi if hi is not None and vhi is not None else None
        else:
            lo = lo + c * vhi if lo is not None and vhi is not None else None
            hi = hi + c * vlo if hi is not None else None
    return lo, hi


def _propagate(rows: list[_Row], bounds: dict[str, tuple[int, int | None]]) -> bool:
    """Tighten variable intervals; False when some row cannot be satisfied."""
    for _ in range(100):
        changed = False
        for coeffs, const, is_eq in rows:
            if is_eq and coeffs:
                g = math.gcd(*[abs(c) for c in coeffs.values()])
                if g > 1 and const % g:
                    return False
            lo, hi = _row_range(coeffs, const, bounds)
            if hi is not None and hi < 0:
                return False
            if is_eq and lo is not None and lo > 0:
                return False
            if not coeffs:
                if const < 0 or (is_eq and const != 0):
                    return False
                continue
            for v, c in coeffs.items():
                vlo, vhi = bounds[v]
                rest_lo, rest_hi = _row_range({u: d for u, d in coeffs.items() if u != v}, const, bounds)
                # c*v + rest (>=|==) 0, with exact integer ceil/floor
                if c > 0:
                    if rest_hi is not None:
                        new_lo = max(vlo, -(rest_hi // c))
                        if new_lo > vlo:
                            bounds[v] = (new_lo, vhi)
                            vlo = new_lo
                            changed = True
                    if is_eq and rest_lo is not None:
                        new_hi = (-rest_lo) // c
                        if vhi is None or new_hi < vhi:
                            bounds[v] = (vlo, new_hi)
                            vhi = new_hi
                            changed = True
                else:
                    if rest_hi is not None:
                        new_hi = rest_hi // (-c)
                        if vhi is None or new_hi < vhi:
                            bounds[v] = (vlo, new_hi)
                            vhi = new_hi
                            changed = True
                    if is_eq and rest_lo is not None:
                        new_lo = max(vlo, -((-rest_lo) // (-c)))
                        if new_lo > vlo:
                            bounds[v] = (new_lo, vhi)
                            vlo = new_lo
                            changed = True
                if vhi is not None and vlo > vhi:
                    return False
        if not changed:
            return True
    return True


def _pivot_equalities(
    rows: list[_Row], bounds: dict[str, tuple[int, int | None]]
) -> tuple[list[_Row], list[tuple[str, dict[str, int], int]]]:
    """Eliminate equalities by unit-coefficient pivots; exact over the integers."""
    eliminations: list[tuple[str, dict[str, int], int]] = []
    work = [(dict(c), k, e) for c, k, e in rows]
    while True:
        pivot = None
        for idx, (coeffs, const, is_eq) in enumerate(work):
            if not is_eq:
                continue
            for v, c in sorted(coeffs.items()):
                if abs(c) == 1:
                    pivot = (idx, v, c)
                    break
            if pivot:
                break
        if pivot is None:
            return work, eliminations
        idx, v, c = pivot
        coeffs, const, _ = work.pop(idx)
        # c*v + rest = 0  =>  v = -(rest)/c; the variable's interval becomes
        # constraints on the substituted expression
        expr = {u: -d * c for u, d in coeffs.items() if u != v}
        k = -const * c
        eliminations.append((v, expr, k))
        vlo, vhi = bounds[v]
        new_work: list[_Row] = [(dict(expr), k - vlo, False)]  # expr + k >= vlo
        if vhi is not None:
            new_work.append(({u: -d for u, d in expr.items()}, vhi - k, False))
        for cf, kk, eq in work:
            a = cf.pop(v, 0)
            if a:
                for u, d in expr.items():
                    cf[u] = cf.get(u, 0) + a * d
                kk += a * k
                cf = {u: d for u, d in cf.items() if d}
            new_work.append((cf, kk, eq))
        work = new_work


def _search_bounded(
    rows: list[_Row],
    names: list[str],
    bounds: dict[str, tuple[int, int | None]],
) -> dict[str, int] | None:
    """Exhaustive lexicographic search when every domain is finite and small."""
    assignment: dict[str, int] = {}

    def feasible_partial() -> bool:
        for coeffs, const, is_eq in rows:
            lo, hi = _row_range(coeffs, const, {
                v: ((assignment[v], assignment[v]) if v in assignment else bounds[v])
                for v in coeffs
            })
            if hi is not None and hi < 0:
                return False
            if is_eq and lo is not None and lo > 0:
                return False
        return True

    def go(i: int) -> dict[str, int] | None:
        if i == len(names):
            return dict(assignment)
        v = names[i]
        lo, hi = bounds[v]
        assert hi is not None
        for val in range(lo, hi + 1):
            assignment[v] = val
            if feasible_partial():
                res = go(i + 1)
                if res is not None:
                    return res
            del assignment[v]
        return None

    return go(0)


def _solve_milp(
    rows: list[_Row],
    names: list[str],
    bounds: dict[str, tuple[int, int | None]],
    time_limit: float,
) -> dict[str, int] | None:
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp

    index = {v: i for i, v in enumerate(names)}
    n = len(names)
    mats, lbs, ubs = [], [], []
    for coeffs, const, is_eq in rows:
        row = [0.0] * n
        for v, c in coeffs.items():
            row[index[v]] = float(c)
        mats.append(row)
        lbs.append(-const)
        ubs.append(-const if is_eq else np.inf)
    lb = np.array([bounds[v][0] for v in names], dtype=float)
    ub = np.array(
        [bounds[v][1] if bounds[v][1] is not None else np.inf for v in names], dtype=float
    )

    def run(c: "np.ndarray", blb: "np.ndarray", bub: "np.ndarray"):
        kwargs = dict(
            c=c,
            integrality=np.ones(n),
            bounds=Bounds(blb, bub),
            options={"time_limit": time_limit},
        )
        if mats:
            kwargs["constraints"] = LinearConstraint(np.array(mats), np.array(lbs), np.array(ubs))
        return milp(**kwargs)

    res = run(np.zeros(n), lb, ub)
    if res.status == 2:
        return None
    if res.status != 0:
        raise SolverLimitError(f"milp backend gave status {res.status}")
    # pin variables one at a time to their minimum for a deterministic witness
    for i, v in enumerate(names):
        c = np.zeros(n)
        c[i] = 1.0
        res = run(c, lb, ub)
        if res.status != 0:
            raise SolverLimitError(f"milp backend gave status {res.status}")
        val = int(round(res.x[i]))
        lb[i] = ub[i] = val
    return {v: int(round(lb[i])) for i, v in enumerate(names)}


def solve_system(
    system: LinSystem, *, milp_time_limit: float = 30.0
) -> dict[str, int] | None:
    """Return a natural-number solution (deterministic) or None when unsatisfiable."""
    rows = _normalize(system.atoms)
    all_names = sorted(system.variables())
    bounds: dict[str, tuple[int, int | None]] = {v: (0, None) for v in all_names}

    if not _propagate(rows, bounds):
        return None
    rows, eliminations = _pivot_equalities(rows, bounds)
    eliminated = {v for v, _, _ in eliminations}
    names = [v for v in all_names if v not in eliminated]
    rows = [r for r in rows if r[0] or r[1] < 0 or (r[2] and r[1] != 0)]
    if not _propagate(rows, bounds):
        return None

    solution: dict[str, int] | None
    if not rows:
        solution = {v: bounds[v][0] for v in names}
    else:
        finite = all(bounds[v][1] is not None for v in names)
        size = 1
        if finite:
            for v in names:
                lo, hi = bounds[v]
                size *= max(0, hi - lo + 1)  # type: ignore[operator]
                if size > _SEARCH_CAP:
                    break
        if finite and size <= _SEARCH_CAP:
            solution = _search_bounded(rows, names, bounds)
        else:
            solution = _solve_milp(rows, names, bounds, milp_time_limit)
    if solution is None:
        return None

    for v, expr, k in reversed(eliminations):
        solution[v] = k + sum(c * solution[u] for u, c in expr.items())
    for v in all_names:
        solution.setdefault(v, 0)
    for a in system.atoms:
        if not a.holds(solution):
            raise SolverLimitError("backend produced an invalid point")
    if any(val < 0 for val in solution.values()):
        raise SolverLimitError("backend produced a negative value")
    return solution
