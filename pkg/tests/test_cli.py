import pytest

from kbosolve.cli import main

SIG1 = """
symbol g 2 1
symbol a 0 1
precedence g > a
"""

SIG2 = """
symbol h 2 1
symbol g 1 1
symbol s 1 1
symbol c 0 1
precedence h > g > s > c
"""

BAD_SIG = """
symbol a 0 0
precedence a
"""


@pytest.fixture()
def sig1_file(tmp_path):
    p = tmp_path / "sig1.kbo"
    p.write_text(SIG1)
    return str(p)


@pytest.fixture()
def sig2_file(tmp_path):
    p = tmp_path / "sig2.kbo"
    p.write_text(SIG2)
    return str(p)


def test_validate(sig1_file, tmp_path, capsys):
    assert main(["validate", "--sig", sig1_file]) == 0
    assert capsys.readouterr().out == "ok\n"
    bad = tmp_path / "bad.kbo"
    bad.write_text(BAD_SIG)
    assert main(["validate", "--sig", str(bad)]) == 2
    assert "ZeroWeightConstant" in capsys.readouterr().err


def test_compare(sig2_file, capsys):
    assert main(["compare", "--sig", sig2_file, "g(c)", "s(c)"]) == 0
    assert capsys.readouterr().out == "GT\n"
    assert main(["compare", "--sig", sig2_file, "s(c)", "g(c)"]) == 0
    assert capsys.readouterr().out == "LT\n"
    assert main(["compare", "--sig", sig2_file, "c", "c"]) == 0
    assert capsys.readouterr().out == "EQ\n"
    assert main(["compare", "--sig", sig2_file, "c", "x"]) == 2


def test_solve_unsat_exit_code(sig1_file, capsys):
    code = main(["solve", "--sig", sig1_file, "--formula", "x > y & y > x"])
    assert code == 1
    assert capsys.readouterr().out == "UNSAT\n"


def test_solve_sat_output_reparses(sig1_file, capsys):
    code = main(["solve", "--sig", sig1_file, "--formula", "x >lex y"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "SAT"
    assert out[1] == "x := g(g(a,a),a)"
    assert out[2] == "y := g(a,g(a,a))"


def test_solve_trace_goes_to_stderr(sig1_file, capsys):
    code = main(["solve", "--sig", sig1_file, "--formula", "x > y", "--trace"])
    assert code == 0
    err = capsys.readouterr().err
    assert err.startswith("#")


def test_count(sig1_file, capsys):
    assert main(["count", "--sig", sig1_file, "--weight", "5", "--cap", "10"]) == 0
    assert capsys.readouterr().out == "2\n"


def test_at_least(sig1_file, capsys):
    assert main(["at-least", "--sig", sig1_file, "--n", "2"]) == 0
    out = capsys.readouterr().out
    assert "x = 5" in out and "x > 8" in out


def test_encode_dio(capsys):
    assert main(["encode-dio", "x1 + 3 = x0"]) == 0
    out = capsys.readouterr().out
    assert "symbol h 2 1" in out
    assert "precedence h > g > s > c" in out
    assert "g(s(s(s(s(s(x1))))))" in out
    assert main(["encode-dio", "x1 + + = x0"]) == 2


def test_oracle_listing(sig1_file, capsys):
    assert main(["oracle", "--sig", sig1_file, "--max-weight", "5"]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "a",
        "g(a,a)",
        "g(a,g(a,a))",
        "g(g(a,a),a)",
    ]


def test_formula_file_input(sig1_file, tmp_path, capsys):
    f = tmp_path / "formula.txt"
    f.write_text("x > y | y > x")
    assert main(["solve", "--sig", sig1_file, "--formula-file", str(f)]) == 0
    assert capsys.readouterr().out.startswith("SAT")


def test_resource_limit_exit_code(sig1_file, capsys):
    code = main(
        [
            "solve",
            "--sig",
            sig1_file,
            "--formula",
            "g(x,y) > g(y,z) & g(z,x) > g(x,y) & g(y,z) > g(z,x)",
            "--max-branches",
            "5",
        ]
    )
    assert code == 3
    assert "resource limit" in capsys.readouterr().err
