"""
Bidirectional mapping between expressions and token sequences.

Two vocabulary modes share one layout:

- skeleton: padding, operators, variables x_1..x_D, integers -B..B and the
  placeholder ``c``
- full: the skeleton tokens plus sign tokens ``+``/``-``, mantissa tokens
  ``N0000``..``N9999`` and exponent tokens ``E-100``..``E100``

A non-integral constant occupies three tokens ``[sign, mantissa, exponent]``
with value ``sign * m * 10**e`` and ``10**(k-1) <= m < 10**k`` for ``k``
mantissa digits (``0.2042`` -> ``[+, N2042, E-4]``). Zero is
``[+, N0000, E0]``.
"""

import hashlib
import json
import math
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import EncodingError, ParseErrorCode, PrefixParseError
from .expression import Expression, NodeKind, preorder
from .operators import BINARY_OPERATORS, UNARY_OPERATORS

VOCAB_FORMAT_VERSION = 1
PAD = "<pad>"
PLACEHOLDER = "c"
EXPONENT_MIN = -100
EXPONENT_MAX = 100

TokenSequence = list[int]


class TokenRole(str, Enum):
    """Grammatical role of a token in the prefix grammar."""

    PAD = "pad"
    BINARY = "binary"
    UNARY = "unary"
    LEAF = "leaf"
    SIGN = "sign"
    MANTISSA = "mantissa"
    EXPONENT = "exponent"


class VocabMode(str, Enum):
    SKELETON = "skeleton"
    FULL = "full"


class Vocabulary(BaseModel):
    """Ordered symbol table; indices are stable for a given parameter set."""

    model_config = ConfigDict(frozen=True)

    mode: VocabMode = VocabMode.SKELETON
    num_variables: int = Field(default=3, ge=1, le=9)
    integer_bound: int = Field(default=10, ge=0)
    mantissa_digits: int = Field(default=4, ge=1, le=4)

    @cached_property
    def tokens(self) -> list[str]:
        tokens = [PAD]
        tokens += list(BINARY_OPERATORS) + list(UNARY_OPERATORS)
        tokens += [f"x_{d}" for d in range(1, self.num_variables + 1)]
        tokens += [str(i) for i in range(-self.integer_bound, self.integer_bound + 1)]
        tokens.append(PLACEHOLDER)
        if self.mode == VocabMode.FULL:
            tokens += ["+", "-"]
            width = self.mantissa_digits
            tokens += [f"N{m:0{width}d}" for m in range(10**width)]
            tokens += [f"E{e}" for e in range(EXPONENT_MIN, EXPONENT_MAX + 1)]
        return tokens

    @cached_property
    def index(self) -> dict[str, int]:
        return {token: i for i, token in enumerate(self.tokens)}

    @cached_property
    def roles(self) -> list[TokenRole]:
        return [self._role(token) for token in self.tokens]

    def _role(self, token: str) -> TokenRole:
        if token == PAD:
            return TokenRole.PAD
        if token in BINARY_OPERATORS:
            return TokenRole.BINARY
        if token in UNARY_OPERATORS:
            return TokenRole.UNARY
        if token in ("+", "-"):
            return TokenRole.SIGN
        if token.startswith("N"):
            return TokenRole.MANTISSA
        if token.startswith("E"):
            return TokenRole.EXPONENT
        return TokenRole.LEAF

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def default_canvas_length(self) -> int:
        return 32 if self.mode == VocabMode.FULL else 24

    def role_of(self, token_id: int) -> TokenRole:
        return self.roles[token_id]

    def to_ids(self, tokens: Sequence[str]) -> TokenSequence:
        try:
            return [self.index[t] for t in tokens]
        except KeyError as e:
            raise EncodingError(f"Token not in vocabulary: {e.args[0]}") from None

    def to_tokens(self, ids: Sequence[int]) -> list[str]:
        return [self.tokens[int(i)] for i in ids]

    def pad(self, ids: Sequence[int], length: int) -> TokenSequence:
        if len(ids) > length:
            raise EncodingError(f"Sequence of {len(ids)} tokens exceeds canvas {length}")
        return list(ids) + [self.pad_id] * (length - len(ids))

    def strip_padding(self, ids: Sequence[int]) -> TokenSequence:
        out = list(ids)
        while out and out[-1] == self.pad_id:
            out.pop()
        return out

    def to_json(self) -> str:
        payload = {
            "format_version": VOCAB_FORMAT_VERSION,
            "params": self.model_dump(mode="json"),
            "tokens": self.tokens,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        payload = json.loads(text)
        if payload.get("format_version") != VOCAB_FORMAT_VERSION:
            raise EncodingError(
                f"Unsupported vocabulary format {payload.get('format_version')}"
            )
        vocab = cls(**payload["params"])
        if vocab.tokens != payload["tokens"]:
            raise EncodingError("Serialized token table does not match its parameters")
        return vocab

    @cached_property
    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


# Constants


def encode_constant(value: float, mantissa_digits: int = 4) -> tuple[str, str, str]:
    """Three-token encoding ``[sign, mantissa, exponent]`` of a real."""
    if not math.isfinite(value):
        raise EncodingError(f"Cannot encode non-finite constant {value}")
    sign = "-" if value < 0 else "+"
    magnitude = abs(value)
    if magnitude == 0:
        return "+", "N" + "0" * mantissa_digits, "E0"
    exponent = math.floor(math.log10(magnitude)) - (mantissa_digits - 1)
    mantissa = round(magnitude / 10.0**exponent)
    if mantissa >= 10**mantissa_digits:
        mantissa //= 10
        exponent += 1
    elif mantissa < 10 ** (mantissa_digits - 1):
        mantissa = round(magnitude / 10.0 ** (exponent - 1))
        exponent -= 1
    if not EXPONENT_MIN <= exponent <= EXPONENT_MAX:
        raise EncodingError(f"Exponent {exponent} of {value} outside [-100, 100]")
    return sign, f"N{mantissa:0{mantissa_digits}d}", f"E{exponent}"


def decode_constant(tokens: Sequence[str]) -> float:
    """Inverse of :func:`encode_constant`."""
    if len(tokens) != 3:
        raise PrefixParseError(
            ParseErrorCode.DANGLING_CONSTANT, f"Constant needs 3 tokens, got {list(tokens)}"
        )
    sign, mantissa, exponent = tokens
    if sign not in ("+", "-") or not mantissa.startswith("N") or not exponent.startswith("E"):
        raise PrefixParseError(
            ParseErrorCode.DANGLING_CONSTANT, f"Malformed constant triple {list(tokens)}"
        )
    try:
        m = int(mantissa[1:])
        e = int(exponent[1:])
    except ValueError:
        raise PrefixParseError(
            ParseErrorCode.DANGLING_CONSTANT, f"Malformed constant triple {list(tokens)}"
        ) from None
    # Decimal string conversion keeps 2042e-4 == 0.2042 exactly.
    magnitude = float(f"{m}e{e}")
    return -magnitude if sign == "-" else magnitude


def quantize_constant(value: float, mantissa_digits: int = 4) -> float:
    """Round a value to what the 3-token encoding can represent."""
    return decode_constant(encode_constant(value, mantissa_digits))


def encode_constant_array(
    values: np.ndarray, mantissa_digits: int = 4
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized constant encoding.

    Returns integer arrays ``(negative, mantissa, exponent)`` with exponents
    clipped into [-100, 100]; used to tokenize numeric points.
    """
    values = np.asarray(values, dtype=float)
    negative = (values < 0).astype(np.int64)
    magnitude = np.abs(values)
    nonzero = magnitude > 0
    safe = np.where(nonzero, magnitude, 1.0)
    exponent = np.floor(np.log10(safe)).astype(np.int64) - (mantissa_digits - 1)
    mantissa = np.rint(safe / np.power(10.0, exponent)).astype(np.int64)
    overflow = mantissa >= 10**mantissa_digits
    mantissa = np.where(overflow, mantissa // 10, mantissa)
    exponent = np.where(overflow, exponent + 1, exponent)
    mantissa = np.where(nonzero, mantissa, 0)
    exponent = np.where(nonzero, exponent, 0)
    exponent = np.clip(exponent, EXPONENT_MIN, EXPONENT_MAX)
    return negative, mantissa, exponent


# Expressions


def _leaf_tokens(node: Expression, vocab: Vocabulary) -> list[str]:
    if node.kind == NodeKind.VARIABLE:
        if node.index > vocab.num_variables:
            raise EncodingError(f"Variable x_{node.index} not in vocabulary")
        return [f"x_{node.index}"]
    if node.kind == NodeKind.PLACEHOLDER:
        return [PLACEHOLDER]
    value = node.value
    if value == int(value) and abs(value) <= vocab.integer_bound:
        return [str(int(value))]
    if vocab.mode != VocabMode.FULL:
        raise EncodingError(
            f"Constant {value} requires full mode; skeleton mode needs placeholders"
        )
    return list(encode_constant(value, vocab.mantissa_digits))


def encode_expression(
    expr: Expression, vocab: Vocabulary, canvas_length: int | None = None
) -> TokenSequence:
    """Preorder serialization; constants expand to three tokens in full mode.

    When ``canvas_length`` is given the result is padded to it.
    """
    tokens: list[str] = []
    for node in preorder(expr):
        if node.kind == NodeKind.OPERATOR:
            if node.symbol not in vocab.index:
                raise EncodingError(f"Operator {node.symbol} not in vocabulary")
            tokens.append(node.symbol)
        else:
            tokens.extend(_leaf_tokens(node, vocab))
    ids = vocab.to_ids(tokens)
    if canvas_length is not None:
        return vocab.pad(ids, canvas_length)
    return ids


def decode_expression(ids: Sequence[int], vocab: Vocabulary) -> Expression:
    """Parse a prefix token sequence, ignoring trailing padding."""
    seq = vocab.strip_padding(ids)
    if not seq:
        raise PrefixParseError(ParseErrorCode.EMPTY, "Empty token sequence")
    expr, end = _parse_at(seq, 0, vocab)
    if end != len(seq):
        raise PrefixParseError(
            ParseErrorCode.TRAILING_TOKENS,
            f"Complete expression ends at {end} but sequence has {len(seq)} tokens",
        )
    return expr


def _parse_at(seq: list[int], pos: int, vocab: Vocabulary) -> tuple[Expression, int]:
    if pos >= len(seq):
        raise PrefixParseError(ParseErrorCode.ARITY_DEFICIT, "Missing operand")
    token_id = int(seq[pos])
    if not 0 <= token_id < vocab.size:
        raise PrefixParseError(ParseErrorCode.UNEXPECTED_TOKEN, f"Index {token_id} out of range")
    token = vocab.tokens[token_id]
    role = vocab.roles[token_id]
    if role in (TokenRole.BINARY, TokenRole.UNARY):
        arity = 2 if role == TokenRole.BINARY else 1
        children = []
        cursor = pos + 1
        for _ in range(arity):
            child, cursor = _parse_at(seq, cursor, vocab)
            children.append(child)
        return Expression.op(token, *children), cursor
    if role == TokenRole.LEAF:
        if token == PLACEHOLDER:
            return Expression.placeholder(), pos + 1
        if token.startswith("x_"):
            return Expression.var(int(token[2:])), pos + 1
        return Expression.const(float(int(token))), pos + 1
    if role == TokenRole.SIGN:
        group = seq[pos : pos + 3]
        roles = [vocab.roles[int(i)] for i in group]
        if roles != [TokenRole.SIGN, TokenRole.MANTISSA, TokenRole.EXPONENT]:
            raise PrefixParseError(
                ParseErrorCode.DANGLING_CONSTANT,
                f"Incomplete constant group at {pos}: {vocab.to_tokens(group)}",
            )
        return Expression.const(decode_constant(vocab.to_tokens(group))), pos + 3
    raise PrefixParseError(
        ParseErrorCode.UNEXPECTED_TOKEN, f"Token {token!r} cannot start a node at {pos}"
    )


def is_valid_prefix(ids: Sequence[int], vocab: Vocabulary) -> bool:
    """Arity-counter validity check, equivalent to decoding success."""
    seq = vocab.strip_padding(ids)
    if not seq:
        return False
    need = 1
    pos = 0
    roles = vocab.roles
    while pos < len(seq):
        if need == 0:
            return False
        token_id = int(seq[pos])
        if not 0 <= token_id < vocab.size:
            return False
        role = roles[token_id]
        if role == TokenRole.BINARY:
            need += 1
        elif role == TokenRole.UNARY:
            pass
        elif role == TokenRole.LEAF:
            need -= 1
        elif role == TokenRole.SIGN:
            if pos + 2 >= len(seq):
                return False
            if roles[int(seq[pos + 1])] != TokenRole.MANTISSA:
                return False
            if roles[int(seq[pos + 2])] != TokenRole.EXPONENT:
                return False
            need -= 1
            pos += 2
        else:
            return False
        pos += 1
    return need == 0
