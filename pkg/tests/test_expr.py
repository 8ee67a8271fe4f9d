import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from initjump import expr
from initjump.expr import (BinOp, Call, DomainError, MissingBinding, Neg, Num, Var, evaluate,
                           parse, to_source)

from parser_cases import ERROR_CASES, VALUE_CASES


@pytest.mark.parametrize("source, bindings, expected", VALUE_CASES)
def test_value_cases(source, bindings, expected):
    assert evaluate(parse(source), bindings) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("source, error, offset", ERROR_CASES)
def test_error_cases(source, error, offset):
    with pytest.raises(getattr(expr, error)) as info:
        parse(source)
    assert info.value.offset == offset


def test_precedence_tree_shapes():
    assert parse("1+2*3").ast == BinOp("+", Num(1.0), BinOp("*", Num(2.0), Num(3.0)))
    assert parse("2^3^2").ast == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))
    assert parse("-2^2").ast == Neg(BinOp("^", Num(2.0), Num(2.0)))
    assert parse("1-2-3").ast == BinOp("-", BinOp("-", Num(1.0), Num(2.0)), Num(3.0))


def test_unknown_identifier_names_the_culprit():
    with pytest.raises(expr.UnknownIdentifier) as info:
        parse("t + lambda")
    assert info.value.name == "lambda"
    assert info.value.offset == 4


def test_syntax_error_describes_expectation():
    with pytest.raises(expr.ExprSyntaxError) as info:
        parse("(1+2")
    assert "')'" in info.value.expected


def test_eval_spec_examples():
    assert evaluate(parse("exp(0)"), {}) == 1.0
    assert evaluate(parse("exp(-t/0.5)"), {"t": 0.5}) == pytest.approx(math.exp(-1), abs=1e-11)
    assert evaluate(parse("t + x*s"), {"t": 1, "x": 2, "s": 3}) == 7.0


def test_missing_binding():
    with pytest.raises(MissingBinding) as info:
        evaluate(parse("t + x"), {"t": 1.0})
    assert info.value.name == "x"


@pytest.mark.parametrize("source, bindings", [
    ("ln(x)", {"x": 0.0}),
    ("ln(t - 1)", {"t": 0.5}),
    ("1/x", {"x": 0.0}),
    ("sqrt(-1)", {}),
    ("(-8)^0.5", {}),
])
def test_domain_errors(source, bindings):
    with pytest.raises(DomainError):
        evaluate(parse(source), bindings)


def test_domain_error_reports_offending_node():
    with pytest.raises(DomainError) as info:
        evaluate(parse("1 + ln(x - 2)"), {"x": 1.0})
    assert info.value.node == Call("ln", BinOp("-", Var("x"), Num(2.0)))


def test_array_evaluation_matches_scalar():
    e = parse("2 + sin(t) * x - exp(-s)")
    t = np.linspace(0, 1, 7)
    vec = evaluate(e, {"t": t, "x": 2.0, "s": 0.3})
    for tv, v in zip(t, vec):
        assert v == evaluate(e, {"t": tv, "x": 2.0, "s": 0.3})


def test_array_domain_error_any_element():
    with pytest.raises(DomainError):
        evaluate(parse("ln(x)"), {"x": np.array([1.0, 2.0, -1.0])})


def test_variables_and_constants():
    assert parse("t*s + 1").variables == {"t", "s"}
    assert parse("2^3").is_constant


# -- properties -----------------------------------------------------------------

_leaf = st.one_of(
    st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Num),
    st.sampled_from(["t", "s", "x"]).map(Var),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda a: BinOp(*a)),
        st.tuples(st.sampled_from(expr.FUNCTIONS), children).map(lambda a: Call(*a)),
    )


trees = st.recursive(_leaf, _extend, max_leaves=12)


@given(trees)
def test_print_parse_round_trip(tree):
    assert parse(to_source(tree)).ast == tree


@given(trees, st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=200)
def test_eval_is_deterministic(tree, t, s, x):
    b = {"t": t, "s": s, "x": x}
    try:
        first = evaluate(tree, b)
    except DomainError:
        return
    second = evaluate(tree, b)
    assert first == second or (math.isnan(first) and math.isnan(second))


_ops = st.sampled_from(["+", "-", "*", "/", "^"])


@given(st.lists(st.tuples(_ops, st.booleans(), st.integers(1, 9)), min_size=1, max_size=8),
       st.integers(1, 9))
def test_any_operator_sequence_parses(chain, first):
    # every adjacent operator pair (with optional unary minus) must be accepted
    text = str(first)
    for op, negate, n in chain:
        text += op + ("-" if negate else "") + str(n)
    parse(text)
