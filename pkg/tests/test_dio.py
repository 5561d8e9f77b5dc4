import itertools
import random

import pytest

from kbosolve.dio import (
    DioEquation,
    MalformedEquationError,
    decode_witness,
    encode_dio,
    encode_equation,
    encoding_params,
    gadget_equal_weight,
    gadget_greater_weight,
    parse_dio_system,
)
from kbosolve.formulas import evaluate
from kbosolve.lia import LinAtom, LinExpr, LinRel, LinSystem, solve_system
from kbosolve.oracle import EnumBound, enum_terms
from kbosolve.solver import solve
from kbosolve.terms import App, Var, ground_weight


def test_gadget_semantics_on_ground_pairs():
    params = encoding_params()
    universe = enum_terms(params, EnumBound(4))
    for r, t in itertools.product(universe, repeat=2):
        sub = {"x": r, "y": t}
        wr, wt = ground_weight(r, params), ground_weight(t, params)
        assert evaluate(gadget_equal_weight(Var("x"), Var("y")), sub, params) == (wr == wt)
        assert evaluate(gadget_greater_weight(Var("x"), Var("y")), sub, params) == (wr > wt)


def test_gadget_spot_values():
    params = encoding_params()
    c = App("c")
    sc = App("s", (c,))
    gc = App("g", (c,))
    eq = gadget_equal_weight(Var("x"), Var("y"))
    assert evaluate(eq, {"x": c, "y": c}, params)
    assert not evaluate(eq, {"x": sc, "y": c}, params)
    assert evaluate(eq, {"x": sc, "y": gc}, params)
    gt = gadget_greater_weight(Var("x"), Var("y"))
    assert evaluate(gt, {"x": sc, "y": c}, params)
    assert not evaluate(gt, {"x": c, "y": c}, params)
    assert not evaluate(gt, {"x": c, "y": sc}, params)


def test_encode_shapes():
    eq = DioEquation(("x1",), 3, "x0")
    f = encode_equation(eq)
    left = f.parts[0].left.args[0]  # g(s^5(x1)) -> the tower
    # s^(k+2) over the single summand
    assert left == _s(5, Var("x1"))
    eq = DioEquation(("x1", "x2"), 0, "x0")
    f = encode_equation(eq)
    left = f.parts[0].left.args[0]
    assert left == _s(2, App("h", (Var("x1"), Var("x2"))))
    right = f.parts[0].right.args[0]
    assert right == _s(4, Var("x0"))


def _s(k, t):
    for _ in range(k):
        t = App("s", (t,))
    return t


def test_malformed_equations():
    with pytest.raises(MalformedEquationError):
        DioEquation((), 1, "x0")
    with pytest.raises(MalformedEquationError):
        DioEquation(("x1", "x1"), 0, "x0")
    with pytest.raises(MalformedEquationError):
        DioEquation(("x0",), 0, "x0")
    with pytest.raises(MalformedEquationError):
        parse_dio_system("x1 + 2 + 3 = x0")
    with pytest.raises(MalformedEquationError):
        parse_dio_system("")


def test_parse_dio_system():
    eqs = parse_dio_system("x1 + x2 + 3 = x0; x0 + 1 = x2")
    assert eqs == [
        DioEquation(("x1", "x2"), 3, "x0"),
        DioEquation(("x0",), 1, "x2"),
    ]
    assert parse_dio_system("x1 = x0") == [DioEquation(("x1",), 0, "x0")]


def test_unsat_equation_encodes_unsat():
    params, f = encode_dio([DioEquation(("x1",), 1, "x0"), DioEquation(("x0",), 1, "x1")])
    assert not solve(f, params).sat


def test_roundtrip_small():
    eqs = [DioEquation(("x1",), 3, "x0")]
    params, f = encode_dio(eqs)
    verdict = solve(f, params)
    assert verdict.sat
    values = decode_witness(verdict.witness, params)
    assert all(eq.holds(values) for eq in eqs)


def dio_feasible(eqs, fresh_box=40):
    atoms = []
    for eq in eqs:
        coeffs = {v: 1 for v in eq.summands}
        coeffs[eq.target] = coeffs.get(eq.target, 0) - 1
        atoms.append(LinAtom(LinExpr.of(eq.constant, coeffs), LinRel.EQ, LinExpr.of(0)))
    return solve_system(LinSystem(tuple(atoms))) is not None


def test_random_roundtrip():
    rng = random.Random(21)
    for _ in range(8):
        n_eqs = rng.randint(1, 2)
        eqs = []
        for _ in range(n_eqs):
            names = rng.sample(["x0", "x1", "x2", "x3"], rng.randint(2, 3))
            eqs.append(DioEquation(tuple(names[1:]), rng.randint(0, 5), names[0]))
        params, f = encode_dio(eqs)
        verdict = solve(f, params)
        assert verdict.sat == dio_feasible(eqs)
        if verdict.sat:
            values = decode_witness(verdict.witness, params)
            assert all(eq.holds(values) for eq in eqs)
