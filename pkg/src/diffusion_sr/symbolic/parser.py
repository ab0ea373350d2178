"""
Infix parser for benchmark expressions.

Accepts ``+ - * / ^`` (and ``**``), unary minus, implicit multiplication,
function calls, decimal literals and the variable spellings ``x_1``, ``x1``,
``x`` (= x_1), ``y`` (= x_2) and ``z`` (= x_3). ``a^2`` and ``a^3`` map to the
unary pow2/pow3 operators, any other exponent to binary ``pow``; ``log`` is
the natural logarithm and parses to ``ln``. ``sinh``/``cosh`` expand through
``exp``.
"""

import re

from ..errors import ParseErrorCode, PrefixParseError
from .expression import Expression, NodeKind

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*|\.\d+|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)

_FUNCTIONS = {
    "sin": "sin",
    "cos": "cos",
    "tan": "tan",
    "exp": "exp",
    "asin": "asin",
    "arcsin": "asin",
    "acos": "acos",
    "arccos": "acos",
    "atan": "atan",
    "arctan": "atan",
    "sqrt": "sqrt",
    "ln": "ln",
    "log": "ln",
    "abs": "abs",
}

_VARIABLE_ALIASES = {"x": 1, "y": 2, "z": 3}
_VARIABLE_RE = re.compile(r"^x_?(\d+)$")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            raise PrefixParseError(
                ParseErrorCode.INFIX_SYNTAX, f"Unexpected character at {pos}: {text!r}"
            )
        kind = match.lastgroup or ""
        tokens.append((kind, match.group(kind)))
        pos = match.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return tokens


def _negate(expr: Expression) -> Expression:
    if expr.kind == NodeKind.CONSTANT:
        return Expression.const(-expr.value)
    return Expression.op("mul", Expression.const(-1.0), expr)


class _InfixParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        token = self.peek()
        if token is None:
            self.fail("Unexpected end of input")
        self.pos += 1
        return token  # type: ignore[return-value]

    def expect(self, value: str) -> None:
        kind, text = self.take()
        if text != value:
            self.fail(f"Expected {value!r}, found {text!r}")

    def fail(self, message: str) -> None:
        raise PrefixParseError(ParseErrorCode.INFIX_SYNTAX, f"{message} in {self.text!r}")

    def parse(self) -> Expression:
        expr = self.parse_sum()
        if self.peek() is not None:
            self.fail(f"Trailing input {self.peek()[1]!r}")  # type: ignore[index]
        return expr

    def parse_sum(self) -> Expression:
        left = self.parse_product()
        while (token := self.peek()) is not None and token[1] in ("+", "-"):
            self.take()
            right = self.parse_product()
            left = Expression.op("add" if token[1] == "+" else "sub", left, right)
        return left

    def _starts_atom(self, token: tuple[str, str] | None) -> bool:
        return token is not None and (token[0] in ("number", "name") or token[1] == "(")

    def parse_product(self) -> Expression:
        left = self.parse_unary()
        while True:
            token = self.peek()
            if token is not None and token[1] in ("*", "/"):
                self.take()
                right = self.parse_unary()
                left = Expression.op("mul" if token[1] == "*" else "div", left, right)
            elif self._starts_atom(token):
                left = Expression.op("mul", left, self.parse_power())
            else:
                return left

    def parse_unary(self) -> Expression:
        token = self.peek()
        if token is not None and token[1] == "-":
            self.take()
            return _negate(self.parse_unary())
        if token is not None and token[1] == "+":
            self.take()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Expression:
        base = self.parse_atom()
        token = self.peek()
        if token is not None and token[1] in ("^", "**"):
            self.take()
            exponent = self.parse_unary()
            if exponent.kind == NodeKind.CONSTANT and exponent.value in (2.0, 3.0):
                return Expression.op(f"pow{int(exponent.value)}", base)
            return Expression.op("pow", base, exponent)
        return base

    def parse_atom(self) -> Expression:
        kind, text = self.take()
        if kind == "number":
            return Expression.const(float(text))
        if text == "(":
            inner = self.parse_sum()
            self.expect(")")
            return inner
        if kind != "name":
            self.fail(f"Unexpected token {text!r}")
        lowered = text.lower()
        if lowered in _FUNCTIONS or lowered in ("sinh", "cosh"):
            self.expect("(")
            arg = self.parse_sum()
            self.expect(")")
            if lowered in ("sinh", "cosh"):
                return _hyperbolic(lowered, arg)
            return Expression.op(_FUNCTIONS[lowered], arg)
        if lowered == "c":
            return Expression.placeholder()
        if lowered == "pi":
            return Expression.const(3.141592653589793)
        if lowered in _VARIABLE_ALIASES:
            return Expression.var(_VARIABLE_ALIASES[lowered])
        match = _VARIABLE_RE.match(lowered)
        if match is None:
            self.fail(f"Unknown name {text!r}")
        index = int(match.group(1))  # type: ignore[union-attr]
        if index < 1:
            self.fail(f"Variable indices start at 1, got {text!r}")
        return Expression.var(index)


def _hyperbolic(name: str, arg: Expression) -> Expression:
    pos = Expression.op("exp", arg)
    neg = Expression.op("exp", _negate(arg))
    combined = Expression.op("sub" if name == "sinh" else "add", pos, neg)
    return Expression.op("div", combined, Expression.const(2.0))


def parse_infix(text: str) -> Expression:
    """Parse an infix string into an expression tree."""
    return _InfixParser(text).parse()
