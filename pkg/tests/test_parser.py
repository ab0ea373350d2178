"""
Tests for the infix parser used by benchmark definitions.
"""

import math

import pytest

from src.diffusion_sr.errors import ParseErrorCode, PrefixParseError
from src.diffusion_sr.symbolic.expression import Expression, evaluate
from src.diffusion_sr.symbolic.parser import parse_infix


class TestParseInfix:
    """Operators, precedence and variable spellings."""

    @pytest.mark.parametrize("text", ["x_1", "x1", "x"])
    def test_first_variable_spellings(self, text):
        assert parse_infix(text) == Expression.var(1)

    def test_yz_aliases(self):
        assert parse_infix("y") == Expression.var(2)
        assert parse_infix("z") == Expression.var(3)

    def test_precedence(self):
        assert evaluate(parse_infix("1 + 2 * 3 ^ 2"), [0.0]) == pytest.approx(19.0)
        assert evaluate(parse_infix("-x^2"), [3.0]) == pytest.approx(-9.0)

    def test_small_powers_map_to_unary(self):
        assert parse_infix("x^2").symbol == "pow2"
        assert parse_infix("x**3").symbol == "pow3"
        general = parse_infix("x^0.426")
        assert general.symbol == "pow"

    def test_log_is_natural(self):
        expr = parse_infix("log(x)")
        assert expr.symbol == "ln"
        assert evaluate(expr, [math.e]) == pytest.approx(1.0)

    def test_hyperbolic_expansion(self):
        assert evaluate(parse_infix("sinh(x)"), [0.7]) == pytest.approx(math.sinh(0.7))
        assert evaluate(parse_infix("cosh(x)"), [0.7]) == pytest.approx(math.cosh(0.7))

    def test_implicit_multiplication(self):
        assert evaluate(parse_infix("2x_1"), [4.0]) == pytest.approx(8.0)

    def test_placeholder_and_pi(self):
        assert parse_infix("c") == Expression.placeholder()
        assert parse_infix("pi").value == pytest.approx(math.pi)

    def test_negative_literal_folds(self):
        assert parse_infix("-2.5") == Expression.const(-2.5)

    @pytest.mark.parametrize("text", ["x +", "sin x", "(x", "x $ 2", "foo(x)", "x )", "x_0", "x0 + 1"])
    def test_syntax_errors(self, text):
        with pytest.raises(PrefixParseError) as info:
            parse_infix(text)
        assert info.value.code == ParseErrorCode.INFIX_SYNTAX
