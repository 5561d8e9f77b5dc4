import itertools
import random

from kbosolve.lia import (
    LinAnd,
    LinAtom,
    LinExists,
    LinExpr,
    LinOr,
    LinRel,
    LinSystem,
    expand_to_systems,
    solve_system,
)


def atom(coeffs, rel, const):
    return LinAtom(LinExpr.of(0, coeffs), rel, LinExpr.of(const))


def test_solve_simple_equation():
    sol = solve_system(LinSystem((atom({"x": 2, "y": 3}, LinRel.EQ, 7),)))
    assert sol is not None
    assert 2 * sol["x"] + 3 * sol["y"] == 7
    assert sol == {"x": 2, "y": 1}  # least x first


def test_solve_unsat_by_bounds():
    system = LinSystem(
        (
            atom({"x": 1, "y": 1}, LinRel.EQ, 1),
            atom({"x": 1}, LinRel.GT, 1),
        )
    )
    assert solve_system(system) is None


def test_solve_empty_system():
    assert solve_system(LinSystem(())) == {}


def test_parity_unsat():
    # 2x - 2y = 1 has no integer solution; the gcd check must see it
    assert solve_system(LinSystem((atom({"x": 2, "y": -2}, LinRel.EQ, 1),))) is None


def test_strict_is_exact():
    # over naturals a > b iff a >= b + 1; x > 0 and 2x < 3 pin x = 1
    system = LinSystem(
        (
            atom({"x": 1}, LinRel.GT, 0),
            LinAtom(LinExpr.of(3), LinRel.GT, LinExpr.of(0, {"x": 2})),
        )
    )
    assert solve_system(system) == {"x": 1}


def test_expand_distributes():
    a = atom({"x": 1}, LinRel.EQ, 1)
    b = atom({"x": 1}, LinRel.EQ, 2)
    c = atom({"y": 1}, LinRel.GE, 3)
    systems = list(expand_to_systems(LinAnd((LinOr((a, b)), c)), iter(f"#f{i}" for i in itertools.count()).__next__))
    assert [s.atoms for s in systems] == [(a, c), (b, c)]


def test_expand_renames_bound_variables():
    inner = LinExists(("#k",), atom({"#k": 2, "x": -1}, LinRel.EQ, 0))
    formula = LinAnd((inner, inner))
    counter = itertools.count(1)
    systems = list(expand_to_systems(formula, lambda: f"#f{next(counter)}"))
    assert len(systems) == 1
    names = {v for a in systems[0].atoms for v, _ in a.left.coeffs}
    assert "#f1" in names and "#f2" in names  # two independent copies


def test_completeness_against_exhaustive_search():
    from helpers import exhaustive_lia

    rng = random.Random(42)
    box = 30

    def exhaustive(system):
        return exhaustive_lia(system, box)

    agree = 0
    for _ in range(300):
        n_vars = rng.randint(1, 4)
        names = [f"v{i}" for i in range(n_vars)]
        atoms = []
        for _ in range(rng.randint(1, 4)):
            coeffs = {v: rng.randint(-5, 5) for v in rng.sample(names, rng.randint(1, n_vars))}
            rel = rng.choice([LinRel.EQ, LinRel.GT, LinRel.GE])
            atoms.append(atom(coeffs, rel, rng.randint(-10, 10)))
        system = LinSystem(tuple(atoms))
        got = solve_system(system)
        brute = exhaustive(system)
        if brute is None:
            # exhaustive search is bounded; only a found witness is conclusive
            if got is not None:
                assert all(a.holds(got) for a in system.atoms)
            continue
        assert got is not None, system
        assert all(a.holds(got) for a in system.atoms)
        agree += 1
    assert agree > 50
