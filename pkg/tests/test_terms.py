from hypothesis import given, strategies as st

from stablerel.terms import (
    Struct,
    Var,
    extend,
    is_ground,
    occurs,
    reify,
    render,
    term_vars,
    unify,
    walk,
    walk_all,
)

VARS = [Var(i, f"V{i}") for i in range(4)]

leaves = st.one_of(st.sampled_from(VARS), st.sampled_from(["a", "b", "c"]), st.integers(-2, 2))
terms = st.recursive(
    leaves,
    lambda sub: st.builds(Struct, st.sampled_from(["f", "g"]), st.lists(sub, max_size=3).map(tuple)),
    max_leaves=8,
)


def resolve(t, s):
    return walk_all(t, s)


def test_unify_binds_variable():
    x = Var(0, "X")
    s = unify(x, "a", {})
    assert walk(x, s) == "a"


def test_unify_structures():
    x, y = Var(0), Var(1)
    s = unify(Struct("f", (x, "b")), Struct("f", ("a", y)), {})
    assert walk_all(Struct("f", (x, y)), s) == Struct("f", ("a", "b"))


def test_constant_and_integer_never_unify():
    assert unify("1", 1, {}) is None
    assert unify(1, 1, {}) == {}


def test_functor_or_arity_mismatch_fails():
    assert unify(Struct("f", ("a",)), Struct("g", ("a",)), {}) is None
    assert unify(Struct("f", ("a",)), Struct("f", ("a", "b")), {}) is None


def test_occurs_check_rejects_cycle():
    x = Var(0)
    assert unify(x, Struct("f", (x,)), {}) is None
    assert extend(x, Struct("g", ("a", Struct("f", (x,)))), {}) is None


def test_occurs_check_through_bindings():
    x, y = Var(0), Var(1)
    s = unify(y, Struct("f", (x,)), {})
    assert occurs(x, y, s)
    assert unify(x, y, s) is None


def test_reify_names_free_variables_in_order():
    x, y = Var(7), Var(3)
    assert reify(Struct("p", (x, y, x)), {}) == Struct("p", ("_0", "_1", "_0"))


def test_render():
    assert render(Struct("q", (1, "b"))) == "q(1,b)"
    assert render(Struct("p", ())) == "p"
    assert render(Struct("f", (Struct("g", ("a",)),))) == "f(g(a))"


def test_term_vars_first_occurrence_order():
    x, y = Var(0), Var(1)
    assert term_vars(Struct("f", (y, x, y))) == [y, x]
    assert is_ground(Struct("f", ("a", 1)))
    assert not is_ground(Struct("f", (x,)))


@given(terms, terms)
def test_unify_is_symmetric(a, b):
    s1 = unify(a, b, {})
    s2 = unify(b, a, {})
    assert (s1 is None) == (s2 is None)
    if s1 is not None:
        assert resolve(a, s1) == resolve(b, s1)
        assert resolve(a, s2) == resolve(b, s2)
        # both unifiers are most general, hence equal up to renaming
        assert reify(Struct("t", (a, b)), s1) == reify(Struct("t", (a, b)), s2)


@given(terms, terms)
def test_unify_is_idempotent(a, b):
    s = unify(a, b, {})
    if s is not None:
        assert unify(a, b, s) == s


@given(terms, terms)
def test_unifier_leaves_no_cycles(a, b):
    s = unify(a, b, {})
    if s is not None:
        for v, t in s.items():
            assert not occurs(v, t, s)


@given(terms)
def test_term_unifies_with_itself(t):
    assert unify(t, t, {}) == {}
