"""
Tests for vocabularies, constant encoding and prefix (de)serialization.
"""

import numpy as np
import pytest

from src.diffusion_sr.errors import EncodingError, ParseErrorCode, PrefixParseError
from src.diffusion_sr.symbolic.expression import Expression
from src.diffusion_sr.symbolic.parser import parse_infix
from src.diffusion_sr.symbolic.tokenizer import (
    PAD,
    TokenRole,
    Vocabulary,
    VocabMode,
    decode_constant,
    decode_expression,
    encode_constant,
    encode_expression,
    is_valid_prefix,
    quantize_constant,
)


@pytest.fixture
def skeleton_vocab() -> Vocabulary:
    return Vocabulary()


@pytest.fixture
def full_vocab() -> Vocabulary:
    return Vocabulary(mode=VocabMode.FULL)


class TestVocabulary:
    """Layout, roles and serialization of the symbol table."""

    def test_layout(self, skeleton_vocab):
        tokens = skeleton_vocab.tokens
        assert tokens[0] == PAD
        assert skeleton_vocab.pad_id == 0
        assert {"add", "sin", "x_1", "x_3", "-10", "10", "c"} <= set(tokens)
        assert skeleton_vocab.size == 1 + 13 + 3 + 21 + 1

    def test_full_mode_size(self, full_vocab, skeleton_vocab):
        assert full_vocab.size == skeleton_vocab.size + 2 + 10_000 + 201
        assert full_vocab.tokens[: skeleton_vocab.size] == skeleton_vocab.tokens

    def test_roles(self, full_vocab):
        assert full_vocab.role_of(full_vocab.index["mul"]) == TokenRole.BINARY
        assert full_vocab.role_of(full_vocab.index["sqrt"]) == TokenRole.UNARY
        assert full_vocab.role_of(full_vocab.index["x_2"]) == TokenRole.LEAF
        assert full_vocab.role_of(full_vocab.index["-"]) == TokenRole.SIGN
        assert full_vocab.role_of(full_vocab.index["N0042"]) == TokenRole.MANTISSA
        assert full_vocab.role_of(full_vocab.index["E-7"]) == TokenRole.EXPONENT

    def test_json_round_trip_and_hash(self, full_vocab):
        restored = Vocabulary.from_json(full_vocab.to_json())
        assert restored.tokens == full_vocab.tokens
        assert restored.hash == full_vocab.hash
        assert Vocabulary(num_variables=2).hash != Vocabulary().hash

    def test_unknown_token(self, skeleton_vocab):
        with pytest.raises(EncodingError):
            skeleton_vocab.to_ids(["x_9"])


class TestConstantEncoding:
    def test_reference_value(self):
        assert encode_constant(0.2042) == ("+", "N2042", "E-4")
        assert decode_constant(["+", "N2042", "E-4"]) == 0.2042

    def test_zero_and_negative(self):
        assert encode_constant(0.0) == ("+", "N0000", "E0")
        sign, mantissa, exponent = encode_constant(-31.4159)
        assert (sign, mantissa, exponent) == ("-", "N3142", "E-2")

    def test_mantissa_rounding_overflow(self):
        assert encode_constant(9.99996) == ("+", "N1000", "E-2")

    def test_quantization_error_is_small(self):
        rng = np.random.default_rng(3)
        for value in rng.uniform(-1e3, 1e3, size=50):
            assert abs(quantize_constant(value) - value) <= abs(value) * 1e-3

    def test_rejects_non_finite(self):
        with pytest.raises(EncodingError):
            encode_constant(float("inf"))


class TestExpressionEncoding:
    """Preorder serialization in both vocabulary modes."""

    def test_skeleton_encoding(self, skeleton_vocab):
        expr = parse_infix("c * sin(x_1) + 3")
        ids = encode_expression(expr, skeleton_vocab)
        assert skeleton_vocab.to_tokens(ids) == ["add", "mul", "c", "sin", "x_1", "3"]
        assert decode_expression(ids, skeleton_vocab) == expr

    def test_padding(self, skeleton_vocab):
        ids = encode_expression(Expression.var(1), skeleton_vocab, canvas_length=5)
        assert ids[1:] == [0, 0, 0, 0]
        assert decode_expression(ids, skeleton_vocab) == Expression.var(1)

    def test_canvas_overflow(self, skeleton_vocab):
        with pytest.raises(EncodingError):
            encode_expression(parse_infix("x + x + x"), skeleton_vocab, canvas_length=3)

    def test_full_mode_constant(self, full_vocab):
        expr = parse_infix("0.2042 * x_1")
        tokens = full_vocab.to_tokens(encode_expression(expr, full_vocab))
        assert tokens == ["mul", "+", "N2042", "E-4", "x_1"]
        assert decode_expression(full_vocab.to_ids(tokens), full_vocab) == expr

    def test_skeleton_rejects_real_constant(self, skeleton_vocab):
        with pytest.raises(EncodingError):
            encode_expression(parse_infix("0.5 * x"), skeleton_vocab)

    @pytest.mark.parametrize(
        "tokens, code",
        [
            ([], ParseErrorCode.EMPTY),
            (["add", "x_1"], ParseErrorCode.ARITY_DEFICIT),
            (["x_1", "x_2"], ParseErrorCode.TRAILING_TOKENS),
            (["mul", "+", "N2042", "x_1"], ParseErrorCode.DANGLING_CONSTANT),
            (["N2042"], ParseErrorCode.UNEXPECTED_TOKEN),
        ],
    )
    def test_parse_error_codes(self, full_vocab, tokens, code):
        with pytest.raises(PrefixParseError) as info:
            decode_expression(full_vocab.to_ids(tokens), full_vocab)
        assert info.value.code == code

    def test_interior_padding_is_invalid(self, skeleton_vocab):
        ids = skeleton_vocab.to_ids(["add", "x_1", PAD, "x_2"])
        with pytest.raises(PrefixParseError):
            decode_expression(ids, skeleton_vocab)
        assert not is_valid_prefix(ids, skeleton_vocab)

    def test_validity_check_agrees_with_decoder(self, full_vocab):
        rng = np.random.default_rng(11)
        # bias towards short grammatical-looking sequences
        candidates = full_vocab.to_ids(
            ["add", "mul", "sin", "x_1", "x_2", "3", "c", "+", "N1234", "E-2", PAD]
        )
        for _ in range(500):
            length = int(rng.integers(1, 8))
            ids = [candidates[int(i)] for i in rng.integers(0, len(candidates), size=length)]
            try:
                decode_expression(ids, full_vocab)
                parsed = True
            except PrefixParseError:
                parsed = False
            assert is_valid_prefix(ids, full_vocab) == parsed, full_vocab.to_tokens(ids)
