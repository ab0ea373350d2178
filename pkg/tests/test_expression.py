"""
Tests for expression trees, evaluation and simplification.
"""

import math

import numpy as np
import pytest
import torch

from src.diffusion_sr.symbolic.expression import (
    Expression,
    NodeKind,
    complexity,
    depth_of,
    evaluate,
    evaluate_batch,
    evaluate_torch,
    fill_placeholders,
    height,
    parameters,
    preorder,
    random_node,
    replace_subtree,
    subtree_at,
    to_infix,
    with_parameters,
)
from src.diffusion_sr.symbolic.parser import parse_infix
from src.diffusion_sr.symbolic.simplify import simplify_basic

x1 = Expression.var(1)
x2 = Expression.var(2)


def sample_tree() -> Expression:
    # sin(x_1) + x_2 * 3
    return Expression.op(
        "add", Expression.op("sin", x1), Expression.op("mul", x2, Expression.const(3.0))
    )


class TestStructure:
    """Node counts, heights and preorder addressing."""

    def test_leaf_measures(self):
        assert complexity(x1) == 1
        assert height(x1) == 0

    def test_tree_measures(self):
        tree = sample_tree()
        assert complexity(tree) == 6
        assert height(tree) == 2
        assert [n.kind for n in preorder(tree)][:3] == [
            NodeKind.OPERATOR,
            NodeKind.OPERATOR,
            NodeKind.VARIABLE,
        ]

    def test_arity_is_enforced(self):
        with pytest.raises(ValueError):
            Expression.op("add", x1)
        with pytest.raises(ValueError):
            Expression(NodeKind.VARIABLE, index=0)

    def test_depth_and_subtree(self):
        tree = sample_tree()
        assert depth_of(tree, 0) == 0
        assert depth_of(tree, 2) == 2
        assert subtree_at(tree, 3) == Expression.op("mul", x2, Expression.const(3.0))
        with pytest.raises(IndexError):
            subtree_at(tree, 6)

    def test_replace_subtree_counts(self):
        rng = np.random.default_rng(0)
        tree = sample_tree()
        for _ in range(20):
            pos = random_node(tree, rng)
            new = Expression.op("cos", x2)
            result = replace_subtree(tree, pos, new)
            old = subtree_at(tree, pos)
            assert complexity(result) == complexity(tree) - complexity(old) + complexity(new)
            assert subtree_at(result, pos) == new

    def test_replace_at_root(self):
        assert replace_subtree(sample_tree(), 0, x2) == x2

    def test_random_node_in_range(self):
        rng = np.random.default_rng(1)
        tree = sample_tree()
        seen = {random_node(tree, rng) for _ in range(200)}
        assert seen == set(range(complexity(tree)))

    def test_expressions_are_hashable_values(self):
        assert sample_tree() == sample_tree()
        assert len({sample_tree(), sample_tree()}) == 1


class TestEvaluation:
    """Numeric evaluation with domain guards."""

    def test_evaluate_point(self):
        value = evaluate(sample_tree(), [0.5, 2.0])
        assert value == pytest.approx(math.sin(0.5) + 6.0)

    def test_division_by_zero_is_nan(self):
        expr = Expression.op("div", Expression.const(1.0), x1)
        assert math.isnan(evaluate(expr, [0.0]))
        assert evaluate(expr, [4.0]) == pytest.approx(0.25)

    @pytest.mark.parametrize(
        "text, point",
        [("sqrt(x_1)", -1.0), ("ln(x_1)", 0.0), ("asin(x_1)", 1.5), ("exp(x_1)", 1000.0)],
    )
    def test_guard_violations_are_nan(self, text, point):
        assert math.isnan(evaluate(parse_infix(text), [point]))

    def test_placeholder_needs_override(self):
        expr = Expression.op("mul", Expression.placeholder(), x1)
        assert math.isnan(evaluate(expr, [2.0]))
        assert evaluate(expr, [2.0], constants_override=[3.0]) == pytest.approx(6.0)

    def test_batch_rejects_missing_columns(self):
        with pytest.raises(ValueError):
            evaluate_batch(sample_tree(), np.zeros((3, 1)))

    def test_torch_matches_numpy(self):
        expr = parse_infix("c * sin(x_1) + c * x_2")
        Z = np.random.default_rng(2).uniform(-1, 1, size=(10, 2))
        theta = np.array([1.5, -0.5])
        expected = evaluate_batch(expr, Z, constants_override=theta)
        actual = evaluate_torch(
            expr, torch.as_tensor(Z, dtype=torch.float64), torch.as_tensor(theta)
        )
        np.testing.assert_allclose(actual.numpy(), expected, rtol=1e-12)


class TestParameters:
    def test_parameter_round_trip(self):
        expr = parse_infix("c * x_1 + 2.5")
        assert parameters(expr).tolist() == [1.0, 2.5]
        updated = with_parameters(expr, [3.0, -1.0])
        assert parameters(updated).tolist() == [3.0, -1.0]

    def test_too_many_values(self):
        with pytest.raises(ValueError):
            with_parameters(parse_infix("c * x_1"), [1.0, 2.0])

    def test_fill_placeholders(self):
        filled = fill_placeholders(parse_infix("c + c * x_1"), 2.0)
        assert evaluate(filled, [3.0]) == pytest.approx(8.0)


class TestPrinting:
    def test_infix(self):
        assert to_infix(parse_infix("x^2 + sin(y)")) == "(x_1^2 + sin(x_2))"
        assert to_infix(Expression.const(-2.0)) == "(-2)"


class TestSimplify:
    """Rewrite rules reach a fixed point and never create validity."""

    def test_identities(self):
        assert simplify_basic(parse_infix("x_1 + 0")) == x1
        assert simplify_basic(parse_infix("1 * x_1")) == x1
        assert simplify_basic(parse_infix("x_1 / 1")) == x1

    def test_constant_folding(self):
        assert simplify_basic(parse_infix("2 + 3")) == Expression.const(5.0)

    def test_self_annihilation(self):
        assert simplify_basic(parse_infix("x_1 - x_1")) == Expression.const(0.0)

    def test_guarded_self_division_is_kept(self):
        expr = parse_infix("ln(x_1) / ln(x_1)")
        simplified = simplify_basic(expr)
        assert math.isnan(evaluate(simplified, [-1.0]))

    def test_placeholder_collapse(self):
        assert simplify_basic(parse_infix("c * c + x_1")) == Expression.op(
            "add", Expression.placeholder(), x1
        )

    def test_idempotent(self):
        expr = parse_infix("(x_1 + 0) * 1 + sin(x_2 - x_2)")
        once = simplify_basic(expr)
        assert simplify_basic(once) == once
