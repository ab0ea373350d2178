"""
Random skeletons, constant substitution and point sampling.
"""

import logging
import math

import numpy as np

from ..errors import DataError, DegenerateExpressionError
from ..symbolic.expression import (
    Expression,
    Limits,
    NodeKind,
    complexity,
    evaluate_batch,
    has_placeholders,
    height,
    internal_nodes,
    max_variable_index,
)
from ..symbolic.operators import SAMPLING_OPERATORS, sampling_probabilities
from ..symbolic.simplify import simplify_basic
from ..symbolic.tokenizer import quantize_constant
from .points import PointSet

logger = logging.getLogger(__name__)

MAX_SKELETON_RETRIES = 20
MAX_POINT_ATTEMPTS = 20

_ARITY = {op.name: op.arity for op in SAMPLING_OPERATORS}
_MULTIPLICATIVE_PARENTS = frozenset({"mul", "div", "pow"})


def _random_leaf(rng: np.random.Generator, dims: int) -> Expression:
    choice = int(rng.integers(0, dims + 1))
    if choice == dims:
        return Expression.placeholder()
    return Expression.var(choice + 1)


def _grow(
    rng: np.random.Generator,
    n_ops: int,
    dims: int,
    names: list[str],
    probs: np.ndarray,
) -> Expression:
    if n_ops == 0:
        return _random_leaf(rng, dims)
    symbol = names[int(rng.choice(len(names), p=probs))]
    if _ARITY[symbol] == 1:
        return Expression.op(symbol, _grow(rng, n_ops - 1, dims, names, probs))
    n_left = int(rng.integers(0, n_ops))
    left = _grow(rng, n_left, dims, names, probs)
    right = _grow(rng, n_ops - 1 - n_left, dims, names, probs)
    return Expression.op(symbol, left, right)


def _within(expr: Expression, limits: Limits) -> bool:
    return (
        complexity(expr) <= limits.max_length
        and internal_nodes(expr) <= limits.max_internal_nodes
        and height(expr) <= limits.max_height
    )


def sample_skeleton(
    rng: np.random.Generator,
    limits: Limits = Limits(),
    dims: int = 1,
    simplify: bool = True,
) -> Expression:
    """Sample a random skeleton.

    The number of internal nodes is uniform in ``[0, max_internal_nodes]``;
    operators are drawn by their sampling weights and leaves uniformly from
    ``x_1..x_dims`` and the placeholder. Trees violating ``limits`` are
    resampled; after bounded retries the operator budget shrinks.
    """
    if not 1 <= dims <= 3:
        raise ValueError(f"dims must be in [1, 3], got {dims}")
    names, probs = sampling_probabilities()
    budget = limits.max_internal_nodes
    while True:
        for _ in range(MAX_SKELETON_RETRIES):
            n_ops = int(rng.integers(0, budget + 1))
            tree = _grow(rng, n_ops, dims, names, probs)
            if simplify:
                tree = simplify_basic(tree)
            if _within(tree, limits):
                return tree
        if budget == 0:
            return _random_leaf(rng, dims)
        budget -= 1


def substitute_constants(
    skeleton: Expression,
    rng: np.random.Generator,
    additive_range: tuple[float, float] = (-10.0, 10.0),
    multiplicative_range: tuple[float, float] = (0.05, 10.0),
    mantissa_digits: int | None = None,
) -> Expression:
    """Replace every placeholder by a sampled constant.

    A placeholder under ``mul``, ``div`` or ``pow`` is multiplicative and
    drawn log-uniformly over ``multiplicative_range``; any other placeholder,
    including a root placeholder, is additive and drawn uniformly over
    ``additive_range``. With ``mantissa_digits`` the values are rounded to
    what the constant encoding can represent.
    """
    log_low = math.log(multiplicative_range[0])
    log_high = math.log(multiplicative_range[1])

    def draw(parent: str | None) -> float:
        if parent in _MULTIPLICATIVE_PARENTS:
            value = math.exp(rng.uniform(log_low, log_high))
        else:
            value = rng.uniform(*additive_range)
        if mantissa_digits is not None:
            value = quantize_constant(value, mantissa_digits)
        return float(value)

    def walk(node: Expression, parent: str | None) -> Expression:
        if node.kind == NodeKind.PLACEHOLDER:
            return Expression.const(draw(parent))
        if node.is_leaf:
            return node
        return Expression.op(node.symbol, *(walk(c, node.symbol) for c in node.children))

    return walk(skeleton, None)


def sample_points(
    expr: Expression,
    rng: np.random.Generator,
    n_max: int = 1000,
    n_min: int = 50,
    dims: int | None = None,
    input_range: tuple[float, float] = (-10.0, 10.0),
    max_abs_target: float = 1e10,
    min_acceptance: float = 0.05,
) -> PointSet:
    """Sample a point set on which ``expr`` is valid and bounded.

    ``N`` is uniform in ``[n_min, n_max]`` and inputs are i.i.d. uniform over
    ``input_range``. Rejected rows are redrawn in batches; an acceptance
    rate under ``min_acceptance`` raises DegenerateExpressionError.
    """
    if has_placeholders(expr):
        raise DataError("Cannot sample points for an expression with placeholders")
    D = max(dims or 1, max_variable_index(expr))
    n_min = min(n_min, n_max)
    n = int(rng.integers(n_min, n_max + 1))
    accepted_Z: list[np.ndarray] = []
    accepted_y: list[np.ndarray] = []
    have = drawn = 0
    for _ in range(MAX_POINT_ATTEMPTS):
        Z = rng.uniform(input_range[0], input_range[1], size=(n, D))
        y = evaluate_batch(expr, Z)
        keep = np.isfinite(y) & (np.abs(y) <= max_abs_target)
        drawn += n
        have += int(keep.sum())
        accepted_Z.append(Z[keep])
        accepted_y.append(y[keep])
        if have >= n:
            break
        if have / drawn < min_acceptance:
            raise DegenerateExpressionError(
                f"Only {have}/{drawn} sampled points are valid for {expr}"
            )
    if have < n:
        raise DegenerateExpressionError(
            f"Collected {have}/{n} valid points for {expr} after {drawn} draws"
        )
    return PointSet(np.concatenate(accepted_Z)[:n], np.concatenate(accepted_y)[:n])
