"""
Generational loop for classic and diffusion-guided GP.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..bench.metrics import r2
from ..config.run_config import DecodeConfig, GpConfig, GuidanceConfig
from ..data.points import PointSet
from ..decoding.refinement import refine_constants
from ..decoding.sampling import LogitMatrix
from ..errors import DataError
from ..models.schemas import Candidate, SolverKind
from ..symbolic.expression import Expression, evaluate_batch
from ..symbolic.tokenizer import Vocabulary
from .engine import (
    FitnessCache,
    GenerationStats,
    Individual,
    Primitives,
    subtree_crossover,
    survivors,
    tournament_select,
)
from .guided import guided_mutate, init_population

logger = logging.getLogger(__name__)


@dataclass
class EvolutionResult:
    best: Individual
    candidate: Candidate
    history: list[GenerationStats] = field(default_factory=list)
    island: int = 0
    seeded: bool = False

    @property
    def generations(self) -> int:
        return self.history[-1].generation if self.history else 0

    def generations_to(self, threshold: float) -> Optional[int]:
        """First generation whose best training R^2 reaches ``threshold``."""
        for stats in self.history:
            if stats.best_r2 >= threshold:
                return stats.generation
        return None


def _train_r2(expr: Expression, points: PointSet) -> float:
    try:
        return r2(points.y, evaluate_batch(expr, points.Z))
    except (DataError, ValueError):
        return -math.inf


def _stats(population: list[Individual], points: PointSet, island: int, generation: int) -> GenerationStats:
    finite = [ind.fitness for ind in population if ind.valid]
    return GenerationStats(
        island=island,
        generation=generation,
        best_rmse=population[0].fitness,
        mean_rmse=float(np.mean(finite)) if finite else math.inf,
        best_r2=_train_r2(population[0].expression, points),
    )


def evolve(
    points: PointSet,
    gp: Optional[GpConfig] = None,
    guide: Optional[GuidanceConfig] = None,
    rng: Optional[np.random.Generator] = None,
    logits: Optional[LogitMatrix] = None,
    vocab: Optional[Vocabulary] = None,
    island: int = 0,
    decode: Optional[DecodeConfig] = None,
) -> EvolutionResult:
    """Evolve expressions fitting ``points``.

    Without logits this is classic GP. With logits the population is seeded
    from their greedy decode and mutation is guided with probability
    ``guide.delta``. Offspring merge with parents by (mu + lambda) truncation,
    so the best individual always survives.
    """
    gp = gp or GpConfig()
    guide = guide or GuidanceConfig()
    rng = rng if rng is not None else np.random.default_rng()
    prims = Primitives.from_config(points.dims, gp)
    score = FitnessCache(points)

    init, seeded = init_population(rng, prims, gp, guide, logits, vocab)
    population = survivors([Individual(e, score(e)) for e in init], gp.population)
    history = [_stats(population, points, island, 0)]

    for generation in range(1, gp.generations + 1):
        if gp.early_stop_r2 is not None and history[-1].best_r2 >= gp.early_stop_r2:
            break
        offspring: list[Expression] = []
        while len(offspring) < gp.population:
            parent = tournament_select(population, rng, gp.tournament_size)
            if rng.random() < gp.crossover_rate:
                other = tournament_select(population, rng, gp.tournament_size)
                children = list(subtree_crossover(parent.expression, other.expression, rng, gp.max_height))
            else:
                children = [parent.expression]
            for child in children:
                if rng.random() < gp.mutation_rate:
                    child = guided_mutate(child, rng, prims, gp, guide, logits, vocab)
                offspring.append(child)
        merged = population + [Individual(e, score(e)) for e in offspring[: gp.population]]
        population = survivors(merged, gp.population)
        history.append(_stats(population, points, island, generation))

    best = population[0]
    logger.info(
        f"Island {island} finished after {history[-1].generation} generations: "
        f"{best.expression} RMSE={best.fitness:.4g}"
    )
    if gp.refine_best and best.valid:
        refined = refine_constants(best.expression, points, decode, seed=island)
        expr, train_r2 = refined.expression, refined.train_r2
    else:
        expr, train_r2 = best.expression, history[-1].best_r2
    solver = SolverKind.GUIDED_GP if logits is not None else SolverKind.CLASSIC_GP
    candidate = Candidate.from_expression(
        expr, train_r2, island, solver, rmse=best.fitness, generations=history[-1].generation
    )
    return EvolutionResult(best, candidate, history, island, seeded)
