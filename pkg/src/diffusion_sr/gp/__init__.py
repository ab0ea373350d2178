"""Genetic programming with optional diffusion-guided mutation."""

from .engine import (
    GenerationStats,
    Individual,
    Primitives,
    fitness,
    full_tree,
    grow_tree,
    ramped_half_and_half,
    subtree_crossover,
    survivors,
    tournament_select,
)
from .evolution import EvolutionResult, evolve
from .guided import (
    category_mask,
    grow_guided,
    guided_mutate,
    init_population,
    masked_sample,
    seed_expression,
    token_offset,
)
from .islands import IslandsResult, island_rng, run_islands

__all__ = [
    "EvolutionResult",
    "GenerationStats",
    "Individual",
    "IslandsResult",
    "Primitives",
    "category_mask",
    "evolve",
    "fitness",
    "full_tree",
    "grow_guided",
    "grow_tree",
    "guided_mutate",
    "init_population",
    "island_rng",
    "masked_sample",
    "ramped_half_and_half",
    "run_islands",
    "seed_expression",
    "subtree_crossover",
    "survivors",
    "token_offset",
    "tournament_select",
]
