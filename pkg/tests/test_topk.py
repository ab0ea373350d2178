"""
Tests for Top-K sampling with a stubbed reverse chain.
"""

import numpy as np
import pytest
import torch

from src.diffusion_sr.decoding import topk
from src.diffusion_sr.decoding.sampling import LogitMatrix, SampleResult, one_hot_logits
from src.diffusion_sr.diffusion.checkpoint import build_untrained
from src.diffusion_sr.errors import NoCandidateError
from src.diffusion_sr.models.schemas import SolverKind
from src.diffusion_sr.symbolic.parser import parse_infix


@pytest.fixture
def loaded(tiny_config):
    return build_untrained(tiny_config)


def _stub_chain(monkeypatch, loaded, decodes):
    """Make seed k decode to ``decodes[k]`` (infix text, or a raw token list)."""
    vocab = loaded.vocab
    length = loaded.canvas_length

    def fake_sample_x0(_loaded, condition, seed, clamp_each_step=False, **kwargs):
        item = decodes[seed]
        if isinstance(item, str):
            logits = one_hot_logits(parse_infix(item), vocab, length)
        else:
            ids = vocab.to_ids(item) + [vocab.pad_id] * (length - len(item))
            probs = np.zeros((length, vocab.size))
            probs[np.arange(length), ids] = 1.0
            logits = LogitMatrix(probs, vocab.hash)
        return SampleResult(x0=torch.zeros(length, 1), logits=logits)

    monkeypatch.setattr(topk, "sample_x0", fake_sample_x0)


class TestTopKSolve:
    """Selection, skipping and failure behavior."""

    def test_best_training_fit_wins(self, monkeypatch, loaded, tiny_config, quadratic_points):
        _stub_chain(monkeypatch, loaded, ["sin(x_1)", "c * x_1^2 + x_1", "x_1"])
        result = topk.top_k_solve(loaded, quadratic_points, tiny_config.decode)
        assert result.best.seed == 1
        assert result.best.solver == SolverKind.TOP_K
        assert result.best.train_r2 == pytest.approx(1.0)
        assert result.best.constants[0] == pytest.approx(1.0, abs=1e-6)
        assert len(result.candidates) == 3 and result.invalid == 0

    def test_ties_go_to_lowest_seed(self, monkeypatch, loaded, tiny_config, quadratic_points):
        _stub_chain(monkeypatch, loaded, ["x_1", "x_1^2 + x_1", "x_1 + x_1^2"])
        result = topk.top_k_solve(loaded, quadratic_points, tiny_config.decode)
        assert result.best.seed == 1

    def test_invalid_decodes_are_skipped(self, monkeypatch, loaded, tiny_config, quadratic_points):
        _stub_chain(monkeypatch, loaded, [["add", "x_1"], "x_1^2 + x_1", "x_2"])
        result = topk.top_k_solve(loaded, quadratic_points, tiny_config.decode)
        assert result.invalid == 2
        assert [c.seed for c in result.candidates] == [1]

    def test_nothing_usable(self, monkeypatch, loaded, tiny_config, quadratic_points):
        _stub_chain(monkeypatch, loaded, [["add"], ["x_1", "x_1"], ["mul", "x_1"]])
        with pytest.raises(NoCandidateError):
            topk.top_k_solve(loaded, quadratic_points, tiny_config.decode)

    def test_seed_offset_and_threads(self, monkeypatch, loaded, tiny_config, quadratic_points):
        _stub_chain(monkeypatch, loaded, ["x_1", "x_1", "x_1", "x_1", "x_1^2 + x_1"])
        config = tiny_config.decode.model_copy(update={"seed": 2})
        result = topk.top_k_solve(loaded, quadratic_points, config, workers=2)
        assert sorted(c.seed for c in result.candidates) == [2, 3, 4]
        assert result.best.seed == 4

    def test_untrained_chain_end_to_end(self, loaded, tiny_config, quadratic_points):
        try:
            result = topk.top_k_solve(loaded, quadratic_points, tiny_config.decode)
        except NoCandidateError:
            return
        assert result.best.expr_prefix
        assert len(result.candidates) + result.invalid == tiny_config.decode.top_k
