import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpg.derivatives import EvalPoint, taylor_coordinates
from fpg.errors import DimensionError, ExprSyntaxError, HomogeneityError, UnknownIdentifier
from fpg.expr import BinOp, Call, Neg, Num, Pow, Var, evaluate, parse, pretty
from fpg.fixtures import P0
from fpg.jet import Basis
from fpg.metrics import custom, projective_factor, register_metric


def test_euclidean_norm():
    e = parse("sqrt(y1^2+y2^2+y3^2)", 3)
    assert isinstance(e.root, Call)
    assert evaluate(e, EvalPoint((0, 0, 0), (3, 4, 0))) == 5.0


def test_lambda_lin():
    e = parse("0.05*(y1 + x1*y2)", 3)
    assert evaluate(e, P0) == pytest.approx(0.0525, abs=1e-15)


def test_dimension_error():
    with pytest.raises(DimensionError):
        parse("y4", 3)
    with pytest.raises(DimensionError):
        parse("x0 + y1", 3)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse("tan(y1)", 3)
    with pytest.raises(UnknownIdentifier):
        parse("z1", 3)


@pytest.mark.parametrize(
    "src, line, col",
    [("y1 +", 1, 5), ("(y1", 1, 4), ("y1 ^ 1.5", 1, 6), ("y1 $ y2", 1, 4), ("y1 +\n * y2", 2, 2), ("", 1, 1)],
)
def test_syntax_errors_have_positions(src, line, col):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src, 3)
    assert (info.value.line, info.value.column) == (line, col)
    assert info.value.expected


def test_precedence():
    e = parse("-y1^2", 3)
    assert e.root == Neg(Pow(Var("y", 1), 2))
    e = parse("y1 - y2 - y3", 3)
    assert e.root == BinOp("-", BinOp("-", Var("y", 1), Var("y", 2)), Var("y", 3))
    e = parse("2*y1^(-2)", 3)
    assert e.root == BinOp("*", Num(2.0), Pow(Var("y", 1), -2))
    assert evaluate(parse("-2^2 + 10/5/2", 3), P0) == -3.0


def test_power_needs_integer():
    with pytest.raises(ExprSyntaxError):
        parse("y1^y2", 3)


def test_variables():
    assert parse("x1*y2 + sin(x3)", 3).variables() == {"x1", "y2", "x3"}


# round trip -------------------------------------------------------------------

_leaf = st.one_of(
    st.builds(Var, st.sampled_from("xy"), st.integers(1, 3)),
    st.builds(Num, st.floats(0, 100, allow_nan=False).map(lambda v: round(v, 3))),
)


def _extend(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Neg, children),
        st.builds(Pow, children, st.integers(-3, 4)),
        st.builds(Call, st.sampled_from(["sqrt", "exp", "log", "sin", "cos", "atan"]), children),
    )


nodes = st.recursive(_leaf, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(nodes)
def test_pretty_parse_fixpoint(node):
    text = pretty(node)
    again = parse(text, 3)
    assert again.root == node
    assert pretty(again.root) == text


# jet evaluation agrees with plain evaluation at order zero --------------------------


def test_jet_vs_plain_1000_points():
    src = "sqrt(y1^2 + 2*y2^2 + y3^2 + 0.1*x1*y1*y2) + 0.3*atan(x2)*y3 - exp(x3)*y1/(2 + cos(x1))"
    e = parse(src, 3)
    basis = Basis.taylor(3, 2, 1)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(-0.5, 0.5, 3)
        y = rng.normal(size=3)
        p = EvalPoint(tuple(x), tuple(y))
        plain = evaluate(e, p)
        xs, ys = taylor_coordinates(basis, p)
        jv = evaluate(e, (xs, ys)).value
        worst = max(worst, abs(plain - jv) / max(1.0, abs(plain)))
    assert worst <= 1e-14


def test_homogeneity_gate():
    register_metric(custom(3, parse("sqrt(y1^2+y2^2+y3^2) + 0.1*x2*y1", 3)))
    with pytest.raises(HomogeneityError):
        register_metric(custom(3, parse("y1^2 + y2^2 + y3^2", 3)))
    projective_factor(3, parse("0.05*(y1 + x1*y2)", 3))
    with pytest.raises(HomogeneityError):
        projective_factor(3, parse("0.05*(y1^2 + x1*y2)", 3))
