"""
Tests for logit matrices, greedy decoding and reverse-chain sampling.
"""

import numpy as np
import pytest

from src.diffusion_sr.data.points import PointSet
from src.diffusion_sr.decoding.sampling import (
    LogitMatrix,
    greedy_decode,
    one_hot_logits,
    point_condition,
    sample_sequences,
    sample_x0,
    trace_denoising,
    valid_rate_by_steps,
)
from src.diffusion_sr.diffusion.checkpoint import build_untrained
from src.diffusion_sr.symbolic.parser import parse_infix
from src.diffusion_sr.symbolic.tokenizer import Vocabulary, decode_expression


class TestLogitMatrix:
    """Validation, row lookup and greedy decoding."""

    def test_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            LogitMatrix(np.array([[0.5, 0.4]]), "h")
        with pytest.raises(ValueError):
            LogitMatrix(np.array([[1.5, -0.5]]), "h")
        with pytest.raises(ValueError):
            LogitMatrix(np.array([0.5, 0.5]), "h")

    def test_from_logits_normalizes(self):
        matrix = LogitMatrix.from_logits(np.array([[0.0, 1.0, 2.0], [3.0, 3.0, 3.0]]), "h")
        np.testing.assert_allclose(matrix.probs.sum(axis=1), 1.0)
        np.testing.assert_allclose(matrix.probs[1], 1 / 3)

    def test_row_past_the_canvas_uses_last_row(self):
        probs = np.eye(3)
        matrix = LogitMatrix(probs, "h")
        np.testing.assert_array_equal(matrix.row(7), probs[2])
        assert matrix.length == 3 and matrix.vocab_size == 3

    def test_greedy_ties_go_to_lowest_index(self):
        matrix = LogitMatrix(np.array([[0.0, 0.5, 0.5], [0.25, 0.25, 0.5]]), "h")
        assert greedy_decode(matrix) == [1, 2]

    def test_one_hot_round_trip(self):
        vocab = Vocabulary()
        expr = parse_infix("c * sin(x_1) + x_2")
        matrix = one_hot_logits(expr, vocab, 12)
        assert matrix.vocab_hash == vocab.hash
        assert decode_expression(greedy_decode(matrix), vocab) == expr


class TestReverseChain:
    """Sampling from an untrained denoiser."""

    @pytest.fixture
    def loaded(self, tiny_config):
        return build_untrained(tiny_config, seed=0)

    def test_seeded_sampling_is_deterministic(self, loaded):
        a = sample_x0(loaded, None, seed=3)
        b = sample_x0(loaded, None, seed=3)
        np.testing.assert_array_equal(a.logits.probs, b.logits.probs)
        assert a.logits.length == loaded.canvas_length
        assert a.logits.vocab_size == loaded.vocab.size

    def test_different_seeds_differ(self, loaded):
        a = sample_x0(loaded, None, seed=1)
        b = sample_x0(loaded, None, seed=2)
        assert not np.array_equal(a.logits.probs, b.logits.probs)

    def test_trace_records_requested_steps(self, loaded):
        trace = trace_denoising(loaded, seed=0, trace_steps=[10, 5, 1])
        assert [entry["step"] for entry in trace] == [10, 5, 1]
        assert all(isinstance(entry["valid"], bool) for entry in trace)

    def test_sample_sequences(self, loaded):
        sequences = sample_sequences(loaded, 3, seed=4)
        assert len(sequences) == 3
        assert all(len(s) == loaded.canvas_length for s in sequences)
        assert sequences[0] == sample_sequences(loaded, 1, seed=4)[0]

    def test_valid_rate_by_steps(self, loaded):
        rates = valid_rate_by_steps(loaded, [2, 5], n_samples=2)
        assert set(rates) == {2, 5}
        assert all(0.0 <= r <= 1.0 for r in rates.values())

    def test_point_condition(self, loaded, quadratic_points):
        condition, mask = point_condition(loaded, quadratic_points)
        assert condition.shape == (1, quadratic_points.n_points, loaded.config.model.d_model)
        assert mask is None
        assert point_condition(loaded, None) == (None, None)

    def test_conditioned_sampling_runs(self, loaded):
        points = PointSet(np.linspace(-1, 1, 10)[:, None], np.linspace(0, 2, 10))
        condition, _ = point_condition(loaded, points)
        result = sample_x0(loaded, condition, seed=0, clamp_each_step=True)
        np.testing.assert_allclose(result.logits.probs.sum(axis=1), 1.0, atol=1e-9)
