import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcov.bdd import FALSE, TRUE, Bdd, default_cap
from netcov.errors import BddCapacityError


def test_terminals_and_variables():
    b = Bdd()
    x = b.var(0)
    assert b.and_(x, FALSE) == FALSE
    assert b.or_(x, TRUE) == TRUE
    assert b.and_(x, TRUE) == x
    assert b.var(0) == x  # hash-consed


def test_canonical_form_makes_equivalent_formulas_identical():
    b = Bdd()
    x, y, z = b.var(0), b.var(1), b.var(2)
    lhs = b.and_(x, b.or_(y, z))
    rhs = b.or_(b.and_(x, y), b.and_(z, x))
    assert lhs == rhs
    assert b.or_(x, b.and_(x, y)) == x  # absorption


def test_cofactor_decides_necessity():
    b = Bdd()
    x, y, z = b.var(0), b.var(1), b.var(2)
    f = b.and_(z, b.or_(x, b.and_(x, y)))  # == x & z
    assert b.is_false(b.cofactor(f, 0, 0))
    assert not b.is_false(b.cofactor(f, 1, 0))
    assert b.cofactor(f, 2, 1) == x
    assert b.support(f) == {0, 2}


def test_capacity_is_enforced():
    b = Bdd(cap=4)
    b.var(0)
    b.var(1)
    with pytest.raises(BddCapacityError):
        b.var(2)


def test_env_var_sets_default_cap(monkeypatch):
    monkeypatch.setenv("NETCOV_BDD_CAP", "123")
    assert default_cap() == 123
    assert Bdd().cap == 123


def test_long_chains_do_not_hit_recursion_limit():
    b = Bdd()
    f = b.conjoin(b.var(i) for i in range(1200))
    assert b.is_false(b.cofactor(f, 600, 0))
    assert b.evaluate(f, [True] * 1200)


# formulas as nested tuples over 6 variables
_leaf = st.one_of(st.integers(0, 5).map(lambda i: ("v", i)), st.sampled_from([("t",), ("f",)]))
_formula = st.recursive(_leaf, lambda inner: st.tuples(st.sampled_from(["and", "or"]), inner,
                                                       inner), max_leaves=12)


def build(b, f):
    if f[0] == "v":
        return b.var(f[1])
    if f[0] in ("t", "f"):
        return TRUE if f[0] == "t" else FALSE
    op = b.and_ if f[0] == "and" else b.or_
    return op(build(b, f[1]), build(b, f[2]))


def truth(f, env):
    if f[0] == "v":
        return env[f[1]]
    if f[0] in ("t", "f"):
        return f[0] == "t"
    a, c = truth(f[1], env), truth(f[2], env)
    return (a and c) if f[0] == "and" else (a or c)


@settings(max_examples=150, deadline=None)
@given(_formula, st.integers(0, 5), st.booleans())
def test_bdd_agrees_with_truth_table(f, var, value):
    b = Bdd()
    node = build(b, f)
    cof = b.cofactor(node, var, value)
    for env in itertools.product([False, True], repeat=6):
        assert b.evaluate(node, env) == truth(f, env)
        fixed = list(env)
        fixed[var] = value
        assert b.evaluate(cof, env) == truth(f, fixed)
