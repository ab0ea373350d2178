"""
Tests for GP primitives, diffusion-guided operators, evolution and islands.
"""

import math

import numpy as np
import pandas as pd
import pytest
from scipy.stats import chisquare

from src.diffusion_sr.config.run_config import GpConfig, GuidanceConfig
from src.diffusion_sr.decoding.sampling import LogitMatrix, one_hot_logits
from src.diffusion_sr.gp.engine import (
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
from src.diffusion_sr.gp.evolution import evolve
from src.diffusion_sr.gp.guided import (
    category_mask,
    grow_guided,
    guided_mutate,
    init_population,
    masked_sample,
    seed_expression,
    token_offset,
)
from src.diffusion_sr.gp.islands import HISTORY_COLUMNS, run_islands
from src.diffusion_sr.models.schemas import SolverKind
from src.diffusion_sr.symbolic.expression import Expression, NodeKind, height
from src.diffusion_sr.symbolic.parser import parse_infix
from src.diffusion_sr.symbolic.tokenizer import (
    Vocabulary,
    VocabMode,
    decode_expression,
    encode_expression,
    is_valid_prefix,
)


@pytest.fixture
def prims() -> Primitives:
    return Primitives.from_config(1, GpConfig())


@pytest.fixture
def small_gp() -> GpConfig:
    return GpConfig(population=20, generations=3, init_min_height=1, init_max_height=3, max_height=5)


class TestEngine:
    """Tree generation, fitness, selection, crossover and survival."""

    def test_primitives_from_config(self):
        prims = Primitives.from_config(2, GpConfig(constant_low=-2, constant_high=2))
        assert prims.constants == (-2, -1, 1, 2)
        assert prims.n_terminals == 3
        assert "pow" not in prims.functions

    def test_tree_heights(self, prims):
        rng = np.random.default_rng(0)
        for h in range(4):
            assert height(full_tree(rng, prims, h)) == h
            assert height(grow_tree(rng, prims, h)) <= h

    def test_ramped_half_and_half(self, prims):
        trees = ramped_half_and_half(np.random.default_rng(1), prims, 30, 2, 4)
        assert len(trees) == 30
        assert all(2 <= height(t) <= 4 for t in trees)
        # even slots use the full method
        assert height(trees[0]) == 2 and height(trees[2]) == 3

    def test_fitness(self, quadratic_points):
        assert fitness(parse_infix("x^2 + x"), quadratic_points) == pytest.approx(0.0)
        assert fitness(parse_infix("ln(x)"), quadratic_points) == math.inf
        assert fitness(parse_infix("x_2"), quadratic_points) == math.inf

    def test_tournament_prefers_fitter(self):
        population = [Individual(Expression.var(1), f) for f in (3.0, 1.0, 2.0)]
        rng = np.random.default_rng(0)
        assert tournament_select(population, rng, size=200).fitness == 1.0
        assert tournament_select(population, rng, size=1) in population

    def test_crossover_respects_height_cap(self, prims):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = full_tree(rng, prims, 3)
            b = full_tree(rng, prims, 3)
            for child in subtree_crossover(a, b, rng, max_height=3):
                assert height(child) <= 3

    def test_survivors_prefer_unique_expressions(self):
        x = Expression.var(1)
        sx = Expression.op("sin", x)
        ranked = survivors(
            [Individual(x, 1.0), Individual(x, 1.0), Individual(sx, 1.0), Individual(sx, 5.0)], 3
        )
        assert [ind.expression for ind in ranked] == [x, sx, x]
        assert survivors([Individual(sx, 2.0), Individual(x, 2.0)], 1)[0].expression == x


class TestGuidedOperators:
    """Grammar masks, guided growth and seeding."""

    def test_masks(self):
        vocab = Vocabulary(mode=VocabMode.FULL)
        leaf = category_mask("leaf", vocab, dims=1)
        assert leaf[vocab.index["x_1"]] == 1 and leaf[vocab.index["x_2"]] == 0
        assert leaf[vocab.index["+"]] == 1 and leaf[vocab.index["N0001"]] == 0
        assert leaf[vocab.index["add"]] == 0
        operator = category_mask("operator", vocab)
        assert operator[vocab.index["sin"]] == 1 and operator[vocab.index["x_1"]] == 0
        node = category_mask("node", vocab)
        assert (node == np.maximum(category_mask("leaf", vocab), operator)).all()
        assert node[vocab.pad_id] == 0

    def test_masked_sample_falls_back_to_uniform(self):
        rng = np.random.default_rng(0)
        row = np.array([1.0, 0.0, 0.0, 0.0])
        mask = np.array([0.0, 1.0, 0.0, 1.0])
        draws = {masked_sample(row, mask, rng) for _ in range(50)}
        assert draws == {1, 3}

    def test_masked_sample_follows_row_weights(self):
        rng = np.random.default_rng(1)
        row = np.array([0.1, 0.2, 0.3, 0.4, 0.9])
        mask = np.array([1.0, 1.0, 1.0, 1.0, 0.0])
        counts = np.bincount([masked_sample(row, mask, rng) for _ in range(4000)], minlength=5)
        assert counts[4] == 0
        assert chisquare(counts[:4], f_exp=4000 * row[:4] / row[:4].sum()).pvalue > 1e-3

    def test_grow_reconstructs_one_hot_expression(self):
        vocab = Vocabulary()
        expr = parse_infix("sin(x_1) * x_2 + 3")
        logits = one_hot_logits(expr, vocab, 12)
        grown = grow_guided(logits, vocab, 0, height(expr), np.random.default_rng(0))
        assert grown == expr

    def test_grow_full_mode_constants(self):
        vocab = Vocabulary(mode=VocabMode.FULL)
        expr = parse_infix("0.2042 * x_1 + x_2")
        logits = one_hot_logits(expr, vocab, 16)
        assert grow_guided(logits, vocab, 0, height(expr), np.random.default_rng(0)) == expr
        assert token_offset(expr, 3, vocab) == 5
        assert token_offset(expr, 4, vocab) == 6

    def test_grow_operator_mode_and_leaf_only(self):
        vocab = Vocabulary()
        logits = one_hot_logits(parse_infix("x_1"), vocab, 6)
        rng = np.random.default_rng(0)
        assert grow_guided(logits, vocab, 0, 0, rng) == Expression.var(1)
        forced = grow_guided(logits, vocab, 0, 2, rng, mode="operator")
        assert height(forced) == 2

    def test_grow_respects_dims(self):
        vocab = Vocabulary()
        probs = np.zeros((4, vocab.size))
        probs[:, vocab.index["x_3"]] = 1.0
        leaf = grow_guided(LogitMatrix(probs, vocab.hash), vocab, 0, 0, np.random.default_rng(0), dims=1)
        assert leaf.is_leaf
        assert leaf.kind != NodeKind.VARIABLE or leaf.index == 1

    def test_zero_delta_matches_classic_mutation(self, prims):
        vocab = Vocabulary()
        gp = GpConfig()
        guide = GuidanceConfig(delta=0.0)
        expr = parse_infix("sin(x_1) * x_1 + 2")
        logits = one_hot_logits(expr, vocab, 12)
        for seed in range(20):
            guided = guided_mutate(expr, np.random.default_rng(seed), prims, gp, guide, logits, vocab)
            classic = guided_mutate(expr, np.random.default_rng(seed), prims, gp, guide)
            assert guided == classic

    def test_mutation_respects_height_cap(self, prims):
        vocab = Vocabulary()
        gp = GpConfig(max_height=4, init_max_height=4)
        guide = GuidanceConfig(delta=1.0, grow_height=7)
        expr = parse_infix("sin(x_1) * x_1 + 2")
        logits = one_hot_logits(expr, vocab, 12)
        rng = np.random.default_rng(3)
        for _ in range(100):
            expr = guided_mutate(expr, rng, prims, gp, guide, logits, vocab)
            assert height(expr) <= 4

    def test_offspring_encode_to_valid_prefixes(self, prims):
        """Mutation and crossover children re-encode to well-formed prefix sequences."""
        vocab = Vocabulary()
        gp = GpConfig(max_height=5, init_max_height=5)
        guide = GuidanceConfig(delta=1.0, grow_height=7)
        for seed in range(40):
            rng = np.random.default_rng(seed)
            logits = LogitMatrix.from_logits(rng.normal(size=(12, vocab.size)), vocab.hash)
            a, b = ramped_half_and_half(rng, prims, 2, 1, 4)
            for _ in range(5):
                a = guided_mutate(a, rng, prims, gp, guide, logits, vocab)
                b = guided_mutate(b, rng, prims, gp, guide, logits, vocab)
                a, b = subtree_crossover(a, b, rng, gp.max_height)
                for child in (a, b):
                    assert is_valid_prefix(encode_expression(child, vocab), vocab)
                    assert decode_expression(encode_expression(child, vocab), vocab) == child

    def test_operator_mode_forces_operators_above_leaves(self):
        vocab = Vocabulary()
        expr = parse_infix("sin(x_1) * x_2 + 3")
        logits = one_hot_logits(expr, vocab, 12)
        assert GuidanceConfig().grow_mask == "node"
        assert grow_guided(logits, vocab, 0, height(expr), np.random.default_rng(0), mode="node") == expr

        strict = grow_guided(logits, vocab, 0, height(expr), np.random.default_rng(0), mode="operator")
        assert strict != expr
        assert strict.symbol == "add"
        assert strict.children[1].kind == NodeKind.OPERATOR

    def test_init_population_seeding(self, prims, small_gp):
        vocab = Vocabulary()
        guide = GuidanceConfig(seed_size=2)
        logits = one_hot_logits(parse_infix("c * x_1^2 + x_1"), vocab, 12)
        population, seeded = init_population(np.random.default_rng(0), prims, small_gp, guide, logits, vocab)
        assert seeded
        assert len(population) == small_gp.population
        assert population[0] == population[1] == parse_infix("1.0 * x_1^2 + x_1")

        random_only, seeded = init_population(np.random.default_rng(0), prims, small_gp, guide)
        assert not seeded
        assert len(random_only) == small_gp.population

    def test_seed_expression_rejects_unusable_decodes(self, small_gp):
        vocab = Vocabulary()
        probs = np.zeros((4, vocab.size))
        probs[:, vocab.index["add"]] = 1.0
        assert seed_expression(LogitMatrix(probs, vocab.hash), vocab, small_gp, dims=1) is None
        logits = one_hot_logits(parse_infix("x_1 + x_2"), vocab, 6)
        assert seed_expression(logits, vocab, small_gp, dims=1) is None


class TestEvolution:
    """Generational loop and island reduction."""

    def test_evolve_is_deterministic(self, quadratic_points, small_gp):
        a = evolve(quadratic_points, small_gp, rng=np.random.default_rng(0))
        b = evolve(quadratic_points, small_gp, rng=np.random.default_rng(0))
        assert a.candidate.expr_infix == b.candidate.expr_infix
        assert [s.to_dict() for s in a.history] == [s.to_dict() for s in b.history]
        assert a.candidate.solver == SolverKind.CLASSIC_GP
        assert len(a.history) == small_gp.generations + 1

    def test_best_rmse_never_increases(self, quadratic_points, small_gp):
        result = evolve(quadratic_points, small_gp, rng=np.random.default_rng(1))
        best = [s.best_rmse for s in result.history]
        assert all(later <= earlier for earlier, later in zip(best, best[1:]))

    def test_oracle_seeded_run(self, quadratic_points, small_gp):
        vocab = Vocabulary()
        logits = one_hot_logits(parse_infix("x_1^2 + x_1"), vocab, 12)
        gp = small_gp.model_copy(update={"early_stop_r2": 0.999})
        result = evolve(quadratic_points, gp, GuidanceConfig(seed_size=2), np.random.default_rng(0), logits, vocab)
        assert result.seeded
        assert result.candidate.solver == SolverKind.GUIDED_GP
        assert result.candidate.train_r2 == pytest.approx(1.0)
        assert result.generations_to(0.99) == 0
        assert len(result.history) == 1

    @pytest.mark.slow
    def test_classic_gp_fits_quadratic(self, quadratic_points):
        gp = GpConfig(population=200, generations=30, early_stop_r2=0.9999)
        result = evolve(quadratic_points, gp, rng=np.random.default_rng(0))
        assert result.candidate.train_r2 > 0.9

    def test_islands_do_not_depend_on_workers(self, quadratic_points, small_gp):
        guide = GuidanceConfig(islands=2, seed_size=2)
        one = run_islands(quadratic_points, small_gp, guide, seed=4, workers=1)
        two = run_islands(quadratic_points, small_gp, guide, seed=4, workers=2)
        assert one.best.expr_infix == two.best.expr_infix
        pd.testing.assert_frame_equal(one.history_frame(), two.history_frame())

    def test_island_history_csv(self, tmp_path, quadratic_points, small_gp):
        result = run_islands(quadratic_points, small_gp, GuidanceConfig(islands=2, seed_size=2), seed=0)
        path = result.write_history(tmp_path / "history.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == HISTORY_COLUMNS
        assert sorted(frame["island"].unique()) == [0, 1]
        assert len(frame) == 2 * (small_gp.generations + 1)
        best = min(result.islands, key=lambda r: (r.best.fitness, r.candidate.complexity, r.island))
        assert result.best.seed == best.island
