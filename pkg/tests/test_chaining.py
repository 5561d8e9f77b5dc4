import itertools
import random

import pytest

from kbosolve.chaining import (
    Chain,
    Conn,
    chain_branches,
    check_chained,
    flatten,
    normalize_chain,
)
from kbosolve.formulas import TermAtom, TermRel, evaluate, parse_formula
from kbosolve.oracle import EnumBound, enum_terms
from kbosolve.terms import App, Var


def _fresh():
    counter = itertools.count(1)
    return lambda: f"_v{next(counter)}"


def _atom(text, params):
    f = parse_formula(text, params)
    assert isinstance(f, TermAtom)
    return f


def test_flatten_introduces_definitions(sig2):
    atom = _atom("x >w g(h(y,y))", sig2)
    out = flatten([atom], _fresh())
    assert out == [
        TermAtom(Var("_v1"), App("h", (Var("y"), Var("y"))), TermRel.EQ),
        TermAtom(Var("x"), App("g", (Var("_v1"),)), TermRel.SUCC_W),
    ]


def test_flatten_identity_on_flat(sig2):
    atom = _atom("x >lex g(y)", sig2)
    assert flatten([atom], _fresh()) == [atom]


def test_flatten_nested_twice_innermost_first(sig2):
    # constants in argument position are pulled out too: flat means a symbol
    # applied to variables only
    atom = _atom("x = g(h(h(y,y),c))", sig2)
    out = flatten([atom], _fresh())
    assert out[0] == TermAtom(Var("_v1"), App("h", (Var("y"), Var("y"))), TermRel.EQ)
    assert out[1] == TermAtom(Var("_v2"), App("c"), TermRel.EQ)
    assert out[2] == TermAtom(Var("_v3"), App("h", (Var("_v1"), Var("_v2"))), TermRel.EQ)
    assert out[3].right == App("g", (Var("_v3"),))


def test_normalize_chain_spec_cases(sig1):
    x, y, z = Var("x"), Var("y"), Var("z")
    w, lex, eq = TermRel.SUCC_W, TermRel.SUCC_LEX, TermRel.EQ
    assert normalize_chain([TermAtom(x, y, w), TermAtom(y, x, w)], sig1) is None
    chain = normalize_chain([TermAtom(x, y, eq), TermAtom(y, x, eq)], sig1)
    assert chain is not None
    assert chain.terms == (x, y) and chain.conns == (Conn.EQ,)
    chain = normalize_chain(
        [TermAtom(x, y, lex), TermAtom(y, z, lex), TermAtom(x, z, lex)], sig1
    )
    assert chain.terms == (x, y, z) and chain.conns == (Conn.LEX, Conn.LEX)
    assert (
        normalize_chain([TermAtom(x, y, w), TermAtom(y, z, eq), TermAtom(x, z, lex)], sig1)
        is None
    )


def test_chain_branches_already_chained(sig1):
    atom = _atom("x >w y", sig1)
    chains = list(chain_branches([atom], sig1))
    assert chains == [Chain((Var("x"), Var("y")), (Conn.W,))]


def test_chain_branches_self_strict_is_empty(sig1):
    assert list(chain_branches([_atom("x >w x", sig1)], sig1)) == []


def test_chain_branches_five_way_split(sig1):
    # unrelated pair (x, y) alongside x >w z: every arrangement of y is explored
    atoms = [_atom("x >w z", sig1)]
    chains = list(chain_branches(atoms, sig1, extra_terms=[Var("y")]))
    # y equal to x, strictly between, equal to z, above, below: 5 relative
    # positions against x plus the w/lex connector choices
    assert len(chains) == 9
    rels = set()
    for c in chains:
        ix = c.terms.index(Var("x"))
        iy = c.terms.index(Var("y"))
        if iy < ix:
            rels.add("above")
        elif iy == ix + 1 and c.conns[ix] is Conn.EQ:
            rels.add("eq-x")
        else:
            rels.add("other")
    assert {"above", "eq-x", "other"} <= rels


def test_chain_branches_prunes_by_weight(sig2):
    # v = s(u) forces v strictly above u; no arrangement puts them in one row
    atoms = [
        TermAtom(Var("v"), App("s", (Var("u"),)), TermRel.EQ),
        _atom("x >w v", sig2),
    ]
    for chain in chain_branches(atoms, sig2):
        check_chained(chain)
        iv = chain.terms.index(Var("v"))
        iu = chain.terms.index(Var("u"))
        assert iv < iu
        assert Conn.W in chain.conns[iv:iu]


def test_branches_sound_and_complete(sig1):
    rng = random.Random(5)
    universe = enum_terms(sig1, EnumBound(5))
    atom_pool = ["x >w y", "x >lex y", "x = y", "y >w z", "x >lex z", "z = x", "g(x,y) >w z"]
    for _ in range(60):
        texts = rng.sample(atom_pool, rng.randint(1, 3))
        atoms = [_atom(t, sig1) for t in texts]
        flat = flatten(atoms, _fresh())
        chains = list(chain_branches(flat, sig1))
        for chain in chains:
            check_chained(chain)
        names = sorted({v for a in atoms for v in ("x", "y", "z") if v in (a.left, a.right) or True})
        names = ["x", "y", "z"]
        flat_names = sorted({t.name for a in flat for t in (a.left, a.right) if isinstance(t, Var)})
        for _ in range(15):
            sub = {n: rng.choice(universe) for n in names}
            direct = all(evaluate(a, sub, sig1) for a in atoms)
            # a branch matches if its atoms hold for some values of the fresh vars
            covered = False
            for chain in chains:
                ext_names = [n for n in flat_names if n.startswith("_v")]
                for combo in itertools.product(universe, repeat=len(ext_names)):
                    full = dict(sub)
                    full.update(dict(zip(ext_names, combo)))
                    if all(evaluate(a, full, sig1) for a in chain.atoms()):
                        covered = True
                        break
                if covered:
                    break
            assert covered == direct
