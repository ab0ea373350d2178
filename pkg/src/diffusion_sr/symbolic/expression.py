"""
Immutable expression trees and the structural primitives used by data
generation, decoding and genetic programming.

Nodes are addressed by preorder index: the root is 0 and children follow
their parent left to right.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np
import torch

from .operators import OPERATORS, get_operator


class NodeKind(str, Enum):
    """Kinds of expression nodes."""

    OPERATOR = "operator"
    VARIABLE = "variable"
    CONSTANT = "constant"
    PLACEHOLDER = "placeholder"


@dataclass(frozen=True, slots=True)
class Expression:
    """A node of an immutable expression tree.

    Attributes:
        kind: Node kind
        symbol: Operator name for operator nodes, empty otherwise
        value: Numeric value for constant nodes
        index: 1-based variable index for variable nodes
        children: Child expressions, as many as the operator's arity
    """

    kind: NodeKind
    symbol: str = ""
    value: float = 0.0
    index: int = 0
    children: tuple[Expression, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == NodeKind.OPERATOR:
            arity = get_operator(self.symbol).arity
            if len(self.children) != arity:
                raise ValueError(
                    f"Operator {self.symbol} expects {arity} children, "
                    f"got {len(self.children)}"
                )
        elif self.children:
            raise ValueError(f"{self.kind.value} nodes cannot have children")
        if self.kind == NodeKind.VARIABLE and self.index < 1:
            raise ValueError("Variable indices start at 1")

    @classmethod
    def op(cls, symbol: str, *children: Expression) -> Expression:
        return cls(NodeKind.OPERATOR, symbol=symbol, children=tuple(children))

    @classmethod
    def var(cls, index: int) -> Expression:
        return cls(NodeKind.VARIABLE, index=index)

    @classmethod
    def const(cls, value: float) -> Expression:
        return cls(NodeKind.CONSTANT, value=float(value))

    @classmethod
    def placeholder(cls) -> Expression:
        return cls(NodeKind.PLACEHOLDER)

    @property
    def is_leaf(self) -> bool:
        return self.kind != NodeKind.OPERATOR

    @property
    def is_parameter(self) -> bool:
        """True for leaves whose value BFGS refinement may change."""
        return self.kind in (NodeKind.CONSTANT, NodeKind.PLACEHOLDER)

    def __str__(self) -> str:
        return to_infix(self)


@dataclass(frozen=True)
class Limits:
    """Size bounds for generated and evolved trees."""

    max_length: int = 20
    max_internal_nodes: int = 5
    max_height: int = 7

    def __post_init__(self) -> None:
        if self.max_length < 1 or self.max_internal_nodes < 0 or self.max_height < 1:
            raise ValueError(f"Invalid limits: {self}")


def preorder(expr: Expression) -> Iterator[Expression]:
    """Yield nodes in preorder."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def complexity(expr: Expression) -> int:
    """Total number of nodes in the tree."""
    return 1 + sum(complexity(child) for child in expr.children)


def internal_nodes(expr: Expression) -> int:
    return sum(1 for n in preorder(expr) if n.kind == NodeKind.OPERATOR)


def height(expr: Expression) -> int:
    """Length of the longest root-to-leaf path; a leaf has height 0."""
    if not expr.children:
        return 0
    return 1 + max(height(child) for child in expr.children)


def depth_of(expr: Expression, position: int) -> int:
    """Depth of the node at a preorder position."""
    _check_position(expr, position)
    node, depth = expr, 0
    offset = position
    while offset > 0:
        offset -= 1
        for child in node.children:
            size = complexity(child)
            if offset < size:
                node = child
                depth += 1
                break
            offset -= size
    return depth


def subtree_at(expr: Expression, position: int) -> Expression:
    """Subtree rooted at a preorder position."""
    _check_position(expr, position)
    for i, node in enumerate(preorder(expr)):
        if i == position:
            return node
    raise IndexError(position)  # unreachable


def replace_subtree(expr: Expression, position: int, new: Expression) -> Expression:
    """Return a copy of ``expr`` with the subtree at ``position`` replaced."""
    _check_position(expr, position)
    return _replace(expr, position, new)


def _replace(node: Expression, offset: int, new: Expression) -> Expression:
    if offset == 0:
        return new
    offset -= 1
    children = list(node.children)
    for i, child in enumerate(children):
        size = complexity(child)
        if offset < size:
            children[i] = _replace(child, offset, new)
            return Expression.op(node.symbol, *children)
        offset -= size
    raise IndexError(offset)  # unreachable


def random_node(expr: Expression, rng: np.random.Generator) -> int:
    """Uniformly random preorder index."""
    return int(rng.integers(0, complexity(expr)))


def _check_position(expr: Expression, position: int) -> None:
    size = complexity(expr)
    if not 0 <= position < size:
        raise IndexError(f"Position {position} out of range for {size}-node tree")


def max_variable_index(expr: Expression) -> int:
    """Largest variable index used, 0 if none."""
    return max(
        (n.index for n in preorder(expr) if n.kind == NodeKind.VARIABLE), default=0
    )


def has_placeholders(expr: Expression) -> bool:
    return any(n.kind == NodeKind.PLACEHOLDER for n in preorder(expr))


def parameters(expr: Expression, placeholder_value: float = 1.0) -> np.ndarray:
    """Values of constant and placeholder leaves in preorder."""
    return np.array(
        [
            n.value if n.kind == NodeKind.CONSTANT else placeholder_value
            for n in preorder(expr)
            if n.is_parameter
        ],
        dtype=float,
    )


def with_parameters(expr: Expression, values: Sequence[float]) -> Expression:
    """Substitute constant and placeholder leaves, in preorder, by ``values``."""
    it = iter(values)

    def rebuild(node: Expression) -> Expression:
        if node.is_parameter:
            return Expression.const(float(next(it)))
        if node.is_leaf:
            return node
        return Expression.op(node.symbol, *(rebuild(c) for c in node.children))

    result = rebuild(expr)
    if next(it, None) is not None:
        raise ValueError("More parameter values than parameter leaves")
    return result


def fill_placeholders(expr: Expression, value: float = 1.0) -> Expression:
    """Replace every placeholder leaf by a constant."""
    if expr.kind == NodeKind.PLACEHOLDER:
        return Expression.const(value)
    if expr.is_leaf:
        return expr
    return Expression.op(
        expr.symbol, *(fill_placeholders(c, value) for c in expr.children)
    )


# Evaluation


def evaluate_batch(
    expr: Expression,
    inputs: np.ndarray,
    constants_override: Sequence[float] | None = None,
) -> np.ndarray:
    """Evaluate on every row of ``inputs``; invalid entries are NaN.

    Domain-guard violations, division by zero, overflow and any non-finite
    intermediate propagate as NaN. Placeholders evaluate to NaN unless
    ``constants_override`` supplies values for the parameter leaves.
    """
    Z = np.atleast_2d(np.asarray(inputs, dtype=float))
    needed = max_variable_index(expr)
    if Z.shape[1] < needed:
        raise ValueError(
            f"Expression uses x_{needed} but points have {Z.shape[1]} columns"
        )
    params = iter(constants_override) if constants_override is not None else None
    with np.errstate(all="ignore"):
        return _eval_numpy(expr, Z, params)


def _eval_numpy(node: Expression, Z: np.ndarray, params: Iterator[float] | None) -> np.ndarray:
    n = Z.shape[0]
    if node.kind == NodeKind.VARIABLE:
        return Z[:, node.index - 1].copy()
    if node.is_parameter:
        if params is not None:
            return np.full(n, float(next(params)))
        if node.kind == NodeKind.PLACEHOLDER:
            return np.full(n, np.nan)
        return np.full(n, node.value)
    op = OPERATORS[node.symbol]
    args = [_eval_numpy(child, Z, params) for child in node.children]
    out = np.asarray(op.numpy_fn(*args), dtype=float)
    violated = op.guard_mask(*args)
    if violated is not None:
        out = np.where(violated, np.nan, out)
    return np.where(np.isfinite(out), out, np.nan)


def evaluate(
    expr: Expression,
    point: Sequence[float] | np.ndarray,
    constants_override: Sequence[float] | None = None,
) -> float:
    """Evaluate at a single point; returns NaN when the value is invalid."""
    row = np.asarray(point, dtype=float).reshape(1, -1)
    return float(evaluate_batch(expr, row, constants_override)[0])


def evaluate_torch(
    expr: Expression, inputs: torch.Tensor, params: torch.Tensor
) -> torch.Tensor:
    """Differentiable evaluation with parameter leaves taken from ``params``.

    Used for reverse-mode gradients of the fitting loss with respect to the
    constants. No guards are applied; invalid values surface as NaN or inf.
    """
    counter = iter(range(params.shape[0]))

    def walk(node: Expression) -> torch.Tensor:
        if node.kind == NodeKind.VARIABLE:
            return inputs[:, node.index - 1]
        if node.is_parameter:
            return params[next(counter)].expand(inputs.shape[0])
        op = OPERATORS[node.symbol]
        return op.torch_fn(*(walk(child) for child in node.children))

    return walk(expr)


# Printing

_INFIX_BINARY = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


def to_infix(expr: Expression) -> str:
    """Human-readable infix form; pow2/pow3 print as ``^2``/``^3``."""
    if expr.kind == NodeKind.VARIABLE:
        return f"x_{expr.index}"
    if expr.kind == NodeKind.PLACEHOLDER:
        return "c"
    if expr.kind == NodeKind.CONSTANT:
        text = f"{expr.value:.6g}"
        return f"({text})" if expr.value < 0 else text
    if expr.symbol in ("pow2", "pow3"):
        base = to_infix(expr.children[0])
        if not expr.children[0].is_leaf:
            base = f"({base})"
        return f"{base}^{expr.symbol[-1]}"
    if expr.symbol in _INFIX_BINARY:
        left, right = (to_infix(c) for c in expr.children)
        return f"({left} {_INFIX_BINARY[expr.symbol]} {right})"
    return f"{expr.symbol}({to_infix(expr.children[0])})"


def prefix_symbols(expr: Expression) -> list[str]:
    """Vocabulary-free prefix listing; constants print as decimal strings."""
    out = []
    for node in preorder(expr):
        if node.kind == NodeKind.OPERATOR:
            out.append(node.symbol)
        elif node.kind == NodeKind.VARIABLE:
            out.append(f"x_{node.index}")
        elif node.kind == NodeKind.PLACEHOLDER:
            out.append("c")
        else:
            out.append(repr(node.value))
    return out
