import pytest

from kbosolve.terms import Symbol, validate_params


@pytest.fixture(scope="session")
def sig1():
    # one binary over one constant, unit weights
    return validate_params([Symbol("g", 2, 1), Symbol("a", 0, 1)], ["g", "a"])


@pytest.fixture(scope="session")
def sig2():
    return validate_params(
        [Symbol("h", 2, 1), Symbol("g", 1, 1), Symbol("s", 1, 1), Symbol("c", 0, 1)],
        ["h", "g", "s", "c"],
    )


@pytest.fixture(scope="session")
def sig3():
    # zero-weight unary, greatest by precedence
    return validate_params(
        [Symbol("f", 1, 0), Symbol("a", 0, 1), Symbol("b", 0, 2)], ["f", "b", "a"]
    )


@pytest.fixture(scope="session")
def sig4():
    return validate_params(
        [Symbol("c1", 0, 1), Symbol("c2", 0, 1), Symbol("c3", 0, 1)], ["c3", "c2", "c1"]
    )


@pytest.fixture(scope="session")
def sig_unary():
    # a single positive-weight unary over two constants
    return validate_params(
        [Symbol("g", 1, 2), Symbol("c1", 0, 1), Symbol("c2", 0, 2)], ["g", "c2", "c1"]
    )


@pytest.fixture(scope="session")
def sig_w2():
    # weight-2 symbols for the counting checks
    return validate_params(
        [Symbol("g", 3, 2), Symbol("a", 0, 1)], ["g", "a"]
    )
