"""Parser, printer and evaluator of the smooth expression language."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gosphere.services.expression.nodes import Binary, Const, Unary, Var, evaluate
from gosphere.services.expression.parser import coordinate_variables, parse_expr, print_expr, tokenize
from gosphere.utils.errors import ArityError, ExpressionSyntaxError, UnknownIdentifierError, ValidationError

VARIABLES = ("s1", "s2", "s3")


def reference_eval(text: str, env):
    """Independent evaluator: a second recursive descent over the raw characters, on numpy scalars."""
    position = 0

    def peek():
        nonlocal position
        while position < len(text) and text[position] == " ":
            position += 1
        return text[position] if position < len(text) else ""

    def take(char):
        nonlocal position
        assert peek() == char
        position += 1

    def expr():
        value = term()
        while peek() in ("+", "-"):
            op = peek()
            take(op)
            value = value + term() if op == "+" else value - term()
        return value

    def term():
        value = factor()
        while peek() in ("*", "/"):
            op = peek()
            take(op)
            value = value * factor() if op == "*" else value / factor()
        return value

    def factor():
        base = unary()
        if peek() == "^":
            take("^")
            return base ** factor()
        return base

    def unary():
        if peek() == "-":
            take("-")
            return -atom()
        return atom()

    def atom():
        nonlocal position
        char = peek()
        if char == "(":
            take("(")
            value = expr()
            take(")")
            return value
        start = position
        if char.isdigit() or char == ".":
            while position < len(text) and (text[position].isdigit() or text[position] in ".eE" or
                                             (text[position] in "+-" and text[position - 1] in "eE")):
                position += 1
            return np.float64(text[start:position])
        while position < len(text) and (text[position].isalnum() or text[position] == "_"):
            position += 1
        name = text[start:position]
        if peek() == "(":
            take("(")
            value = expr()
            take(")")
            return {"sqrt": np.sqrt, "exp": np.exp, "log": np.log}[name](value)
        return np.float64(env[name])

    return expr()


@st.composite
def trees(draw, depth=5):
    """Random trees with nonnegative constants (a leading minus parses as negation)."""
    if depth == 0 or draw(st.booleans()) and depth < 5:
        if draw(st.booleans()):
            return Var(draw(st.sampled_from(VARIABLES)))
        return Const(draw(st.floats(min_value=0.0, max_value=10.0, allow_nan=False).map(lambda v: round(v, 3))))
    kind = draw(st.sampled_from(["neg", "sqrt", "exp", "+", "-", "*", "/", "^"]))
    if kind in ("neg", "sqrt", "exp"):
        return Unary(kind, draw(trees(depth - 1)))
    return Binary(kind, draw(trees(depth - 1)), draw(trees(depth - 1)))


class TestParser:
    def test_family_function_parses(self):
        tree = parse_expr("sqrt(s1^2+s2+s3)")
        value = evaluate(tree, {"s1": np.array([0.6]), "s2": np.array([0.36]), "s3": np.array([0.28])})
        assert value[0] == pytest.approx(1.0, abs=1e-15)

    def test_syntax_error_reports_offset(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expr("s1+*s2")
        assert info.value.offset == 3
        assert "number" in info.value.expected
        assert info.value.code == "EXPRESSION_SYNTAX"

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as info:
            parse_expr("s1+s4")
        assert info.value.offset == 3

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifierError):
            parse_expr("abs(s1)")

    def test_arity_mismatch(self):
        with pytest.raises(ArityError):
            parse_expr("sqrt(s1, s2)")

    def test_empty_text_rejected(self):
        with pytest.raises(ValidationError):
            parse_expr("   ")

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expr("(s1+s2")
        assert info.value.offset == 6

    def test_power_is_right_associative(self):
        assert parse_expr("s1^s2^s3") == Binary("^", Var("s1"), Binary("^", Var("s2"), Var("s3")))

    def test_subtraction_is_left_associative(self):
        assert parse_expr("s1-s2-s3") == Binary("-", Binary("-", Var("s1"), Var("s2")), Var("s3"))

    def test_unary_minus_binds_to_atom_before_power(self):
        assert parse_expr("-s1^2") == Binary("^", Unary("neg", Var("s1")), Const(2.0))

    def test_coordinate_variables(self):
        names = coordinate_variables("x", 3)
        assert names == ["x1", "x2", "x3"]
        assert parse_expr("x1*x3", names) == Binary("*", Var("x1"), Var("x3"))
        with pytest.raises(UnknownIdentifierError):
            parse_expr("x4", names)

    def test_tokenize_offsets_are_bytes(self):
        tokens = tokenize("s1 + 2.5e-1")
        assert [token.offset for token in tokens] == [0, 3, 5, 11]
        assert tokens[-1].kind == "end"


class TestEvaluation:
    def test_matches_reference_on_random_points(self, rng):
        text = "sqrt(s1^2+s2+s3)+0.1*s1"
        tree = parse_expr(text)
        points = rng.uniform(0.1, 2.0, size=(20, 3))
        env = {name: points[:, k] for k, name in enumerate(VARIABLES)}
        values = evaluate(tree, env)
        for row, value in zip(points, values):
            expected = reference_eval(text, dict(zip(VARIABLES, row)))
            assert value == pytest.approx(expected, abs=1e-12)

    def test_invalid_operations_give_nan(self):
        value = evaluate(parse_expr("log(s1)-sqrt(s2)"), {"s1": np.array([-1.0]), "s2": np.array([1.0])})
        assert np.isnan(value[0])


class TestPrinter:
    def test_minimal_parentheses(self):
        assert print_expr(parse_expr("(s1+s2)*s3")) == "(s1+s2)*s3"
        assert print_expr(parse_expr("s1+(s2*s3)")) == "s1+s2*s3"
        assert print_expr(parse_expr("(s1^s2)^s3")) == "(s1^s2)^s3"
        assert print_expr(parse_expr("s1 - (s2 - s3)")) == "s1-(s2-s3)"

    def test_canonical_text_reprints(self):
        for text in ("sqrt(s1^2+s2+s3)", "-s1*exp(s2)/(1+s3)", "s1^-s2", "2.5*s1-0.125"):
            assert print_expr(parse_expr(text)) == text

    @settings(max_examples=1000, deadline=None)
    @given(tree=trees())
    def test_parse_print_round_trip(self, tree):
        assert parse_expr(print_expr(tree)) == tree

    @settings(max_examples=1000, deadline=None)
    @given(tree=trees(), point=st.tuples(*[st.floats(min_value=0.1, max_value=3.0)] * 3))
    def test_evaluation_matches_reference(self, tree, point):
        env = dict(zip(VARIABLES, point))
        text = print_expr(tree)
        with np.errstate(all="ignore"):
            expected = float(reference_eval(text, env))
        if not math.isfinite(expected) or abs(expected) > 1e12:
            return
        value = float(evaluate(parse_expr(text), {name: np.array([v]) for name, v in env.items()})[0])
        assert value == pytest.approx(expected, rel=1e-12, abs=1e-12)
