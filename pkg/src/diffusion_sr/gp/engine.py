"""
Tree-based genetic programming primitives.

Terminals are the input variables and small non-zero integer constants; the
function set is the operator sampling set, drawn uniformly. Fitness is the
RMSE on the training points with +inf for invalid individuals.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..bench.metrics import rmse
from ..config.run_config import GpConfig
from ..data.points import PointSet
from ..symbolic.expression import (
    Expression,
    complexity,
    evaluate_batch,
    height,
    max_variable_index,
    random_node,
    replace_subtree,
    subtree_at,
)
from ..symbolic.operators import SAMPLING_OPERATORS

logger = logging.getLogger(__name__)

MAX_GROW_ATTEMPTS = 50
MAX_CROSSOVER_ATTEMPTS = 10


@dataclass(frozen=True)
class Primitives:
    """Terminal and function sets for one search problem."""

    dims: int
    constant_probability: float = 0.2
    constants: tuple[int, ...] = (-5, -4, -3, -2, -1, 1, 2, 3, 4, 5)
    functions: tuple[str, ...] = tuple(op.name for op in SAMPLING_OPERATORS)

    @classmethod
    def from_config(cls, dims: int, config: GpConfig) -> "Primitives":
        constants = tuple(
            c for c in range(config.constant_low, config.constant_high + 1) if c != 0
        )
        return cls(dims, config.constant_probability, constants)

    @property
    def arity(self) -> dict[str, int]:
        return {op.name: op.arity for op in SAMPLING_OPERATORS}

    @property
    def n_terminals(self) -> int:
        return self.dims + (1 if self.constants and self.constant_probability > 0 else 0)


@dataclass
class Individual:
    expression: Expression
    fitness: float = math.inf

    @property
    def valid(self) -> bool:
        return math.isfinite(self.fitness)

    @property
    def complexity(self) -> int:
        return complexity(self.expression)


def random_terminal(rng: np.random.Generator, prims: Primitives) -> Expression:
    if prims.constants and rng.random() < prims.constant_probability:
        return Expression.const(float(prims.constants[int(rng.integers(0, len(prims.constants)))]))
    return Expression.var(int(rng.integers(1, prims.dims + 1)))


def _random_function(rng: np.random.Generator, prims: Primitives) -> str:
    return prims.functions[int(rng.integers(0, len(prims.functions)))]


def _build(rng: np.random.Generator, prims: Primitives, max_depth: int, full: bool) -> Expression:
    if max_depth <= 0:
        return random_terminal(rng, prims)
    if not full:
        n_func = len(prims.functions)
        if rng.random() < prims.n_terminals / (prims.n_terminals + n_func):
            return random_terminal(rng, prims)
    symbol = _random_function(rng, prims)
    children = [_build(rng, prims, max_depth - 1, full) for _ in range(prims.arity[symbol])]
    return Expression.op(symbol, *children)


def grow_tree(rng: np.random.Generator, prims: Primitives, max_height: int) -> Expression:
    """Grow method: any primitive at each node until ``max_height``."""
    return _build(rng, prims, max_height, full=False)


def full_tree(rng: np.random.Generator, prims: Primitives, tree_height: int) -> Expression:
    """Full method: operators down to exactly ``tree_height``."""
    return _build(rng, prims, tree_height, full=True)


def random_tree(
    rng: np.random.Generator,
    prims: Primitives,
    min_height: int,
    max_height: int,
    full: bool = False,
) -> Expression:
    """A full or grow tree whose height lies in ``[min_height, max_height]``."""
    if full:
        return full_tree(rng, prims, max_height)
    for _ in range(MAX_GROW_ATTEMPTS):
        tree = grow_tree(rng, prims, max_height)
        if height(tree) >= min_height:
            return tree
    return full_tree(rng, prims, max_height)


def ramped_half_and_half(
    rng: np.random.Generator,
    prims: Primitives,
    n: int,
    min_height: int = 2,
    max_height: int = 6,
) -> list[Expression]:
    """Ramped half-and-half: heights cycle over the range, alternating full and grow."""
    heights = list(range(min_height, max_height + 1))
    trees = []
    for i in range(n):
        h = heights[(i // 2) % len(heights)]
        trees.append(random_tree(rng, prims, min_height, h, full=i % 2 == 0))
    return trees


def fitness(expr: Expression, points: PointSet) -> float:
    """Training RMSE; +inf when the expression is invalid on any point."""
    if max_variable_index(expr) > points.dims:
        return math.inf
    return rmse(points.y, evaluate_batch(expr, points.Z))


def tournament_select(
    population: list[Individual], rng: np.random.Generator, size: int = 3
) -> Individual:
    """Fittest of ``size`` uniform draws; ties go to the earliest draw."""
    picks = rng.integers(0, len(population), size=size)
    return min((population[int(i)] for i in picks), key=lambda ind: ind.fitness)


def subtree_crossover(
    a: Expression, b: Expression, rng: np.random.Generator, max_height: int
) -> tuple[Expression, Expression]:
    """Exchange random subtrees; a child over the height cap is resampled.

    After bounded retries an over-height child is replaced by its parent.
    """
    child_a: Optional[Expression] = None
    child_b: Optional[Expression] = None
    for _ in range(MAX_CROSSOVER_ATTEMPTS):
        pa, pb = random_node(a, rng), random_node(b, rng)
        sa, sb = subtree_at(a, pa), subtree_at(b, pb)
        if child_a is None:
            candidate = replace_subtree(a, pa, sb)
            if height(candidate) <= max_height:
                child_a = candidate
        if child_b is None:
            candidate = replace_subtree(b, pb, sa)
            if height(candidate) <= max_height:
                child_b = candidate
        if child_a is not None and child_b is not None:
            break
    return child_a if child_a is not None else a, child_b if child_b is not None else b


def survivors(candidates: list[Individual], size: int) -> list[Individual]:
    """(mu + lambda) truncation by fitness then complexity, unique expressions first."""
    ranked = sorted(candidates, key=lambda ind: (ind.fitness, ind.complexity))
    chosen: list[Individual] = []
    duplicates: list[Individual] = []
    seen: set[Expression] = set()
    for ind in ranked:
        if ind.expression in seen:
            duplicates.append(ind)
            continue
        seen.add(ind.expression)
        chosen.append(ind)
        if len(chosen) == size:
            return chosen
    return chosen + duplicates[: size - len(chosen)]


@dataclass
class GenerationStats:
    island: int
    generation: int
    best_rmse: float
    mean_rmse: float
    best_r2: float

    def to_dict(self) -> dict[str, float | int]:
        return {
            "island": self.island,
            "generation": self.generation,
            "best_rmse": self.best_rmse,
            "mean_rmse": self.mean_rmse,
            "best_r2": self.best_r2,
        }


@dataclass
class FitnessCache:
    """Per-run memo of expression fitness."""

    points: PointSet
    values: dict[Expression, float] = field(default_factory=dict)

    def __call__(self, expr: Expression) -> float:
        if expr not in self.values:
            self.values[expr] = fitness(expr, self.points)
        return self.values[expr]
