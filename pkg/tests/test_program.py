import pytest
from hypothesis import given

from randprog import ground_programs, safe_programs
from stablerel.program import (
    BuiltinError,
    Literal,
    ParseError,
    Program,
    Rule,
    UnsafeProgram,
    check_safety,
    classify_predicates,
    desugar_constraints,
    ensure_safe,
    eval_builtin,
    parse_body,
    parse_program,
    render_program,
)
from stablerel.terms import Struct, Var


def atom(name, *args):
    return Struct(name, tuple(args))


def test_parse_negative_rule():
    (rule,) = parse_program("p :- not q.").rules
    assert rule.head == atom("p")
    assert rule.body == (Literal(False, atom("q")),)


def test_parse_keeps_body_order_and_shares_variables():
    (rule,) = parse_program("path(X,Y) :- edge(X,Z), path(Z,Y).").rules
    assert [lit.pred for lit in rule.body] == ["edge", "path"]
    x, y = rule.head.args
    assert rule.body[0].atom.args[0] == x
    assert rule.body[1].atom.args[1] == y
    assert rule.body[0].atom.args[1] == rule.body[1].atom.args[0]


def test_variables_are_scoped_per_rule():
    r1, r2 = parse_program("p(X) :- q(X). r(X) :- q(X).").rules
    assert r1.head.args[0] != r2.head.args[0]


def test_anonymous_variables_are_distinct():
    (rule,) = parse_program("p :- r(_, _).").rules
    a, b = rule.body[0].atom.args
    assert a != b


def test_facts_integers_comments_queries_constraints():
    prog = parse_program("% facts\nnum(1). num(-2).\n:- num(X), lt(X, 0).\n?- num(X).\n")
    assert [r.head for r in prog.rules] == [atom("num", 1), atom("num", -2)]
    assert len(prog.constraints) == 1 and len(prog.queries) == 1
    assert prog.constants == frozenset({1, -2, 0})


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("p :- .", 1, 6),
        ("p :- q(.", 1, 8),
        ("p.\nq :- r\n", 3, 1),
        ("p :- q(f(a)).", 1, 9),
        ("p :- q & r.", 1, 8),
    ],
)
def test_parse_errors_report_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_program(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert f"line {line}, column {column}" in str(info.value)


def test_arity_mismatch_and_builtin_heads_are_rejected():
    with pytest.raises(ParseError, match="arity"):
        parse_program("p(a). q :- p(a,b).")
    with pytest.raises(ParseError, match="builtin"):
        parse_program("neq(a,b).")
    with pytest.raises(ParseError, match="arity"):
        parse_program("p :- lt(1).")


def test_parse_body():
    body = parse_body("path(a,X), not q(X)")
    assert [(lit.positive, lit.pred) for lit in body] == [(True, "path"), (False, "q")]


def test_desugar_constraints():
    prog = desugar_constraints(parse_program(":- q. :- r. q."))
    heads = [r for r in prog.rules if r.head.functor.startswith("__c_")]
    assert [str(r) for r in heads] == ["__c_0 :- q, not __c_0.", "__c_1 :- r, not __c_1."]
    assert prog.constraints == ()


def test_desugar_without_constraints_is_identity():
    prog = parse_program("p :- q.")
    assert desugar_constraints(prog) is prog


@pytest.mark.parametrize(
    "text, base, derived",
    [
        ("p :- q.", {"q"}, {"p"}),
        ("edge(a,b). path(X,Y) :- edge(X,Y).", set(), {"edge", "path"}),
        ("", set(), set()),
    ],
)
def test_classify_predicates(text, base, derived):
    assert classify_predicates(parse_program(text)) == (base, derived)


@pytest.mark.parametrize(
    "text, ok",
    [
        ("p(X) :- not q(X).", False),
        ("p(X) :- num(X), not q(X).", True),
        ("r :- lt(X,3).", False),
        ("p(X).", False),
        ("p(X) :- not q(X), num(X).", True),
        ("p(D) :- num(X), num(Y), absdiff(X,Y,D).", True),
        ("p :- num(X), not q(D), absdiff(X,X,D).", False),
        ("p :- num(X), lt(X,Y).", False),
        (":- not q(X).", False),
        ("?- p(X), not q(X).", True),
    ],
)
def test_safety(text, ok):
    assert (check_safety(parse_program(text)) == []) == ok


def test_ensure_safe_reports_every_error():
    with pytest.raises(UnsafeProgram) as info:
        ensure_safe(parse_program("p(X) :- not q(X). r :- lt(Y,1)."))
    assert len(info.value.errors) == 2


def test_builtins():
    assert eval_builtin("neq", ("a", "b")) == ("a", "b")
    assert eval_builtin("neq", (1, 1)) is None
    assert eval_builtin("neq", ("1", 1)) is not None
    assert eval_builtin("lt", (1, 2)) and eval_builtin("lt", (2, 1)) is None
    assert eval_builtin("plus", (2, 3, Var(0))) == (2, 3, 5)
    assert eval_builtin("absdiff", (2, 7, 5)) == (2, 7, 5)
    assert eval_builtin("absdiff", (2, 7, 4)) is None
    assert eval_builtin("lt", ("a", 2)) is None
    with pytest.raises(BuiltinError):
        eval_builtin("lt", (Var(0), 1))


@given(safe_programs())
def test_render_parse_round_trip(prog):
    again = parse_program(render_program(prog))
    assert render_program(again) == render_program(prog)
    assert len(again.rules) == len(prog.rules)


@given(ground_programs())
def test_ground_round_trip_is_exact(rules):
    prog = Program.from_rules(rules)
    assert parse_program(render_program(prog)).rules == prog.rules
