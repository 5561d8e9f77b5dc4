import random

import pytest

from kbosolve.formulas import (
    And,
    ArithAtom,
    ArithRel,
    ArityMismatchError,
    FormulaSyntaxError,
    Not,
    Or,
    TermAtom,
    TermRel,
    eliminate_negations,
    evaluate,
    format_formula,
    parse_formula,
    to_dnf_constraints,
)
from kbosolve.oracle import EnumBound, enum_terms
from kbosolve.terms import App, Var


def test_parse_simple_atoms(sig1):
    f = parse_formula("g(x,a) > x", sig1)
    assert f == TermAtom(App("g", (Var("x"), App("a"))), Var("x"), TermRel.SUCC)

    f = parse_formula("!(x = y) & w(x) > w(y) + 1", sig1)
    assert isinstance(f, And)
    neg, arith = f.parts
    assert neg == Not(TermAtom(Var("x"), Var("y"), TermRel.EQ))
    assert isinstance(arith, ArithAtom)
    assert arith.rel is ArithRel.GT
    assert arith.right.constant == 1 and arith.right.coeff_map == {"y": 1}


def test_parse_errors(sig1):
    with pytest.raises(FormulaSyntaxError):
        parse_formula("g(x", sig1)
    with pytest.raises(ArityMismatchError):
        parse_formula("g(x) > a", sig1)
    with pytest.raises(FormulaSyntaxError):
        parse_formula("x > w(y)", sig1)


def test_parse_split_relations(sig1):
    f = parse_formula("x >w y & x >lex y", sig1)
    assert f.parts[0].rel is TermRel.SUCC_W
    assert f.parts[1].rel is TermRel.SUCC_LEX


def test_print_parse_roundtrip_on_random_asts(sig1):
    rng = random.Random(7)
    atoms = [
        "x > y",
        "g(x,a) = y",
        "x >lex y",
        "x >w g(a,a)",
        "w(x) >= w(y)",
        "w(g(x,x)) = 3",
    ]

    def build(depth):
        if depth == 0 or rng.random() < 0.3:
            return parse_formula(rng.choice(atoms), sig1)
        kind = rng.choice(["and", "or", "not"])
        if kind == "not":
            return Not(build(depth - 1))
        parts = tuple(build(depth - 1) for _ in range(rng.randint(2, 3)))
        return And(parts) if kind == "and" else Or(parts)

    for _ in range(200):
        f = build(3)
        assert parse_formula(format_formula(f), sig1) == f


def test_negation_elimination_rules(sig1):
    s, t = Var("x"), Var("y")
    f = eliminate_negations(Not(TermAtom(s, t, TermRel.SUCC)))
    assert f == Or((TermAtom(s, t, TermRel.EQ), TermAtom(t, s, TermRel.SUCC)))
    f = eliminate_negations(Not(TermAtom(s, t, TermRel.EQ)))
    assert f == Or((TermAtom(s, t, TermRel.SUCC), TermAtom(t, s, TermRel.SUCC)))
    p = parse_formula("w(x) > w(y)", sig1)
    f = eliminate_negations(Not(p))
    assert f == Or(
        (
            ArithAtom(p.left, p.right, ArithRel.EQ),
            ArithAtom(p.right, p.left, ArithRel.GT),
        )
    )


def test_negation_free_and_equivalent(sig1):
    rng = random.Random(13)
    universe = enum_terms(sig1, EnumBound(5))
    atoms = ["x > y", "x = y", "x >w y", "x >lex y", "w(x) > w(y)", "w(x) = w(y)", "w(x) >= 2"]

    def build(depth):
        if depth == 0 or rng.random() < 0.4:
            return parse_formula(rng.choice(atoms), sig1)
        kind = rng.choice(["and", "or", "not", "not"])
        if kind == "not":
            return Not(build(depth - 1))
        parts = tuple(build(depth - 1) for _ in range(2))
        return And(parts) if kind == "and" else Or(parts)

    def not_free(f):
        if isinstance(f, Not):
            return False
        if isinstance(f, (And, Or)):
            return all(not_free(p) for p in f.parts)
        return True

    for _ in range(120):
        f = build(2)
        g = eliminate_negations(f)
        assert not_free(g)
        for _ in range(12):
            sub = {"x": rng.choice(universe), "y": rng.choice(universe)}
            assert evaluate(f, sub, sig1) == evaluate(g, sub, sig1)


def test_dnf_splits_the_order(sig1):
    f = parse_formula("x > y", sig1)
    branches = list(to_dnf_constraints(f))
    assert branches == [
        (TermAtom(Var("x"), Var("y"), TermRel.SUCC_W),),
        (TermAtom(Var("x"), Var("y"), TermRel.SUCC_LEX),),
    ]


def test_dnf_distributes(sig1):
    a = parse_formula("x = y", sig1)
    b = parse_formula("w(x) > 1", sig1)
    c = parse_formula("w(y) > 2", sig1)
    branches = list(to_dnf_constraints(And((Or((a, b)), c))))
    assert branches == [(a, c), (b, c)]
    assert list(to_dnf_constraints(b)) == [(b,)]


def test_dnf_branches_cover_formula(sig1):
    rng = random.Random(99)
    universe = enum_terms(sig1, EnumBound(5))
    atoms = ["x > y", "x = y", "x >w y", "w(x) = w(y)"]
    for _ in range(80):
        parts = tuple(parse_formula(rng.choice(atoms), sig1) for _ in range(3))
        f = Or((And(parts[:2]), parts[2]))
        g = eliminate_negations(f)
        branches = list(to_dnf_constraints(g))
        for _ in range(10):
            sub = {"x": rng.choice(universe), "y": rng.choice(universe)}
            direct = evaluate(f, sub, sig1)
            via = any(
                all(evaluate(atom, sub, sig1) for atom in branch) for branch in branches
            )
            assert direct == via
