"""
Operator table shared by data generation, tokenization, evaluation and GP.

The sampling set carries the un-normalized weights used when generating
skeletons; evaluation-only operators (``log``, ``acos``, ``atan``, ``abs``,
``pow``) exist so benchmark expressions can be parsed and evaluated.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
import torch


class DomainGuard(str, Enum):
    """Input restriction enforced during evaluation."""

    NONE = "none"
    POSITIVE = "positive"
    NON_NEGATIVE = "non_negative"
    UNIT_INTERVAL = "unit_interval"
    NONZERO_DIVISOR = "nonzero_divisor"


@dataclass(frozen=True)
class Operator:
    """A mathematical operator with its arity and sampling weight."""

    name: str
    arity: int
    sample_weight: float
    domain_guard: DomainGuard
    numpy_fn: Callable[..., np.ndarray]
    torch_fn: Callable[..., torch.Tensor]
    sampled: bool = True

    def guard_mask(self, *args: np.ndarray) -> np.ndarray | None:
        """Boolean mask of inputs that violate the domain guard, or None."""
        if self.domain_guard == DomainGuard.POSITIVE:
            return args[0] <= 0
        if self.domain_guard == DomainGuard.NON_NEGATIVE:
            return args[0] < 0
        if self.domain_guard == DomainGuard.UNIT_INTERVAL:
            return np.abs(args[0]) > 1
        if self.domain_guard == DomainGuard.NONZERO_DIVISOR:
            return args[1] == 0
        return None


def _op(
    name: str,
    arity: int,
    weight: float,
    guard: DomainGuard,
    numpy_fn: Callable[..., np.ndarray],
    torch_fn: Callable[..., torch.Tensor],
    sampled: bool = True,
) -> Operator:
    return Operator(name, arity, weight, guard, numpy_fn, torch_fn, sampled)


_OPERATOR_LIST = [
    # binary
    _op("mul", 2, 10, DomainGuard.NONE, np.multiply, torch.mul),
    _op("div", 2, 5, DomainGuard.NONZERO_DIVISOR, np.divide, torch.div),
    _op("add", 2, 10, DomainGuard.NONE, np.add, torch.add),
    _op("sub", 2, 5, DomainGuard.NONE, np.subtract, torch.sub),
    # unary
    _op("exp", 1, 4, DomainGuard.NONE, np.exp, torch.exp),
    _op("sin", 1, 4, DomainGuard.NONE, np.sin, torch.sin),
    _op("cos", 1, 4, DomainGuard.NONE, np.cos, torch.cos),
    _op("tan", 1, 4, DomainGuard.NONE, np.tan, torch.tan),
    _op("asin", 1, 2, DomainGuard.UNIT_INTERVAL, np.arcsin, torch.asin),
    _op("sqrt", 1, 4, DomainGuard.NON_NEGATIVE, np.sqrt, torch.sqrt),
    _op("pow2", 1, 5, DomainGuard.NONE, np.square, torch.square),
    _op("pow3", 1, 2, DomainGuard.NONE, lambda x: x * x * x, lambda x: x * x * x),
    _op("ln", 1, 1, DomainGuard.POSITIVE, np.log, torch.log),
    # evaluation-only
    _op("log", 1, 0, DomainGuard.POSITIVE, np.log, torch.log, sampled=False),
    _op("acos", 1, 0, DomainGuard.UNIT_INTERVAL, np.arccos, torch.acos, sampled=False),
    _op("atan", 1, 0, DomainGuard.NONE, np.arctan, torch.atan, sampled=False),
    _op("abs", 1, 0, DomainGuard.NONE, np.abs, torch.abs, sampled=False),
    _op("pow", 2, 0, DomainGuard.NONE, np.power, torch.pow, sampled=False),
]

OPERATORS: dict[str, Operator] = {op.name: op for op in _OPERATOR_LIST}

SAMPLING_OPERATORS: tuple[Operator, ...] = tuple(
    op for op in _OPERATOR_LIST if op.sampled
)
BINARY_OPERATORS: tuple[str, ...] = tuple(
    op.name for op in SAMPLING_OPERATORS if op.arity == 2
)
UNARY_OPERATORS: tuple[str, ...] = tuple(
    op.name for op in SAMPLING_OPERATORS if op.arity == 1
)


def get_operator(name: str) -> Operator:
    """Look up an operator by name, raising KeyError for unknown symbols."""
    try:
        return OPERATORS[name]
    except KeyError:
        raise KeyError(f"Unknown operator: {name}") from None


def sampling_probabilities() -> tuple[list[str], np.ndarray]:
    """Names and normalized sampling probabilities of the sampling set."""
    names = [op.name for op in SAMPLING_OPERATORS]
    weights = np.array([op.sample_weight for op in SAMPLING_OPERATORS], dtype=float)
    return names, weights / weights.sum()
