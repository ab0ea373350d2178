"""
Diffusion-guided GP operators.

The logit matrix emitted by the diffusion model is a per-position prior over
tokens. GROW walks it in preorder: each node is sampled from the row at its
token offset, restricted by a grammar mask to the categories allowed there.
"""

import logging
from functools import lru_cache
from typing import Literal, Optional

import numpy as np

from ..config.run_config import GpConfig, GuidanceConfig
from ..decoding.sampling import LogitMatrix, greedy_decode
from ..errors import PrefixParseError
from ..symbolic.expression import (
    Expression,
    NodeKind,
    depth_of,
    fill_placeholders,
    height,
    max_variable_index,
    preorder,
    random_node,
    replace_subtree,
)
from ..symbolic.tokenizer import (
    PLACEHOLDER,
    TokenRole,
    Vocabulary,
    VocabMode,
    decode_constant,
    decode_expression,
)
from .engine import Primitives, grow_tree, ramped_half_and_half

logger = logging.getLogger(__name__)

MaskKind = Literal["leaf", "operator", "node"]

_LEAF_ROLES = (TokenRole.LEAF, TokenRole.SIGN)
_OPERATOR_ROLES = (TokenRole.BINARY, TokenRole.UNARY)


@lru_cache(maxsize=64)
def _mask(vocab: Vocabulary, need: MaskKind, dims: Optional[int]) -> np.ndarray:
    allowed: set[TokenRole] = set()
    if need in ("leaf", "node"):
        allowed.update(_LEAF_ROLES)
    if need in ("operator", "node"):
        allowed.update(_OPERATOR_ROLES)
    mask = np.array([role in allowed for role in vocab.roles], dtype=float)
    if dims is not None:
        for d in range(dims + 1, vocab.num_variables + 1):
            mask[vocab.index[f"x_{d}"]] = 0.0
    mask.flags.writeable = False
    return mask


def category_mask(need: MaskKind, vocab: Vocabulary, dims: Optional[int] = None) -> np.ndarray:
    """Binary vector over the vocabulary admitting one grammar category.

    ``leaf`` admits variables, integers, the placeholder and the sign token
    that opens a constant group; ``operator`` admits unary and binary
    operators; ``node`` admits both. With ``dims`` variables beyond
    ``x_dims`` are masked out.
    """
    return _mask(vocab, need, dims)


@lru_cache(maxsize=16)
def _role_mask(vocab: Vocabulary, role: TokenRole) -> np.ndarray:
    mask = np.array([r == role for r in vocab.roles], dtype=float)
    mask.flags.writeable = False
    return mask


def masked_sample(row: np.ndarray, mask: np.ndarray, rng: np.random.Generator) -> int:
    """Sample an index from ``row * mask``; uniform over the mask if that has no mass."""
    weights = row * mask
    total = weights.sum()
    if not total > 0:
        weights, total = mask, mask.sum()
    return int(rng.choice(len(weights), p=weights / total))


def grow_guided(
    logits: LogitMatrix,
    vocab: Vocabulary,
    pos: int,
    h: int,
    rng: np.random.Generator,
    dims: Optional[int] = None,
    mode: Literal["node", "operator"] = "node",
    placeholder_value: float = 1.0,
) -> Expression:
    """Grow a subtree from logit rows starting at token offset ``pos``.

    With ``h <= 0`` only leaves are admitted. Otherwise ``mode="operator"``
    forces an operator at every level above the leaves and ``mode="node"``
    also admits leaves, so a one-hot matrix is reconstructed exactly.
    Children are read from the rows that follow their parent in prefix
    order; rows past the canvas wrap to the last row.
    """
    if logits.vocab_size != vocab.size:
        raise ValueError(
            f"Logit matrix has {logits.vocab_size} columns, vocabulary has {vocab.size}"
        )
    expr, _ = _grow(logits, vocab, pos, h, rng, dims, mode, placeholder_value)
    return expr


def _grow(
    logits: LogitMatrix,
    vocab: Vocabulary,
    pos: int,
    h: int,
    rng: np.random.Generator,
    dims: Optional[int],
    mode: str,
    placeholder_value: float,
) -> tuple[Expression, int]:
    need: MaskKind = "leaf" if h <= 0 else ("node" if mode == "node" else "operator")
    token_id = masked_sample(logits.row(pos), category_mask(need, vocab, dims), rng)
    token = vocab.tokens[token_id]
    role = vocab.roles[token_id]
    if role in _OPERATOR_ROLES:
        cursor = pos + 1
        children = []
        for _ in range(2 if role == TokenRole.BINARY else 1):
            child, cursor = _grow(logits, vocab, cursor, h - 1, rng, dims, mode, placeholder_value)
            children.append(child)
        return Expression.op(token, *children), cursor
    if role == TokenRole.SIGN:
        mantissa = masked_sample(logits.row(pos + 1), _role_mask(vocab, TokenRole.MANTISSA), rng)
        exponent = masked_sample(logits.row(pos + 2), _role_mask(vocab, TokenRole.EXPONENT), rng)
        value = decode_constant([token, vocab.tokens[mantissa], vocab.tokens[exponent]])
        return Expression.const(value), pos + 3
    if token == PLACEHOLDER:
        return Expression.const(placeholder_value), pos + 1
    if token.startswith("x_"):
        return Expression.var(int(token[2:])), pos + 1
    return Expression.const(float(int(token))), pos + 1


def _token_width(node: Expression, vocab: Vocabulary) -> int:
    if node.kind != NodeKind.CONSTANT or vocab.mode != VocabMode.FULL:
        return 1
    value = node.value
    if value == int(value) and abs(value) <= vocab.integer_bound:
        return 1
    return 3


def token_offset(expr: Expression, position: int, vocab: Vocabulary) -> int:
    """Row of the logit matrix that node ``position`` occupies in prefix order."""
    offset = 0
    for i, node in enumerate(preorder(expr)):
        if i == position:
            return offset
        offset += _token_width(node, vocab)
    raise IndexError(f"Position {position} out of range")


def guided_mutate(
    expr: Expression,
    rng: np.random.Generator,
    prims: Primitives,
    gp: GpConfig,
    guide: GuidanceConfig,
    logits: Optional[LogitMatrix] = None,
    vocab: Optional[Vocabulary] = None,
) -> Expression:
    """Replace a random subtree, grown from the logits with probability delta.

    The coin, the growth height and the node are drawn in the same order on
    both branches, so ``delta = 0`` reproduces classic random mutation
    exactly. The new subtree never pushes the tree over ``gp.max_height``.
    """
    coin = rng.random()
    h_t = int(rng.integers(1, guide.grow_height + 1))
    pos = random_node(expr, rng)
    h = max(0, min(h_t, gp.max_height - depth_of(expr, pos)))
    if logits is not None and vocab is not None and coin < guide.delta:
        offset = token_offset(expr, pos, vocab)
        new = grow_guided(logits, vocab, offset, h, rng, prims.dims, guide.grow_mask)
    else:
        new = grow_tree(rng, prims, h)
    return replace_subtree(expr, pos, new)


def seed_expression(
    logits: LogitMatrix, vocab: Vocabulary, gp: GpConfig, dims: int
) -> Optional[Expression]:
    """Greedy decode of the logits, usable as a GP individual, or ``None``."""
    try:
        expr = fill_placeholders(decode_expression(greedy_decode(logits), vocab))
    except PrefixParseError as e:
        logger.warning(f"Greedy decode does not parse ({e}); using random initialisation")
        return None
    if height(expr) > gp.max_height or max_variable_index(expr) > dims:
        logger.warning(f"Greedy decode {expr} violates the height or variable limits; using random initialisation")
        return None
    return expr


def init_population(
    rng: np.random.Generator,
    prims: Primitives,
    gp: GpConfig,
    guide: GuidanceConfig,
    logits: Optional[LogitMatrix] = None,
    vocab: Optional[Vocabulary] = None,
) -> tuple[list[Expression], bool]:
    """Seed clones of the greedy decode plus ramped half-and-half trees.

    Returns the population and whether it was seeded. Without usable logits
    the whole population is random.
    """
    seed = None
    if logits is not None and vocab is not None and guide.seed_size > 0:
        seed = seed_expression(logits, vocab, gp, prims.dims)
    clones = [seed] * min(guide.seed_size, gp.population) if seed is not None else []
    randoms = ramped_half_and_half(
        rng, prims, gp.population - len(clones), gp.init_min_height, gp.init_max_height
    )
    return clones + randoms, seed is not None
