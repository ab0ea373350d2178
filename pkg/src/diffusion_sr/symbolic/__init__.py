"""Expression trees, operators, simplification, parsing and tokenization."""

from .expression import (
    Expression,
    Limits,
    NodeKind,
    complexity,
    evaluate,
    evaluate_batch,
    height,
    preorder,
    random_node,
    replace_subtree,
    to_infix,
)
from .parser import parse_infix
from .simplify import simplify_basic
from .tokenizer import (
    Vocabulary,
    VocabMode,
    decode_constant,
    decode_expression,
    encode_constant,
    encode_expression,
    is_valid_prefix,
)

__all__ = [
    "Expression",
    "Limits",
    "NodeKind",
    "Vocabulary",
    "VocabMode",
    "complexity",
    "decode_constant",
    "decode_expression",
    "encode_constant",
    "encode_expression",
    "evaluate",
    "evaluate_batch",
    "height",
    "is_valid_prefix",
    "parse_infix",
    "preorder",
    "random_node",
    "replace_subtree",
    "simplify_basic",
    "to_infix",
]
