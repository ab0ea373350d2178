"""
Tests for the checkpoint cache.
"""

import pytest

from src.diffusion_sr.diffusion.checkpoint import build_untrained, save_checkpoint
from src.diffusion_sr.models.model_manager import ModelManager
from .conftest import assert_memory_cleared


class TestModelManager:
    """Test suite for cache management."""

    def test_initial_state_empty(self):
        """Test that the cache starts empty."""
        assert_memory_cleared(ModelManager.get_memory_usage())

    def test_put_and_get(self, tmp_path, tiny_config):
        loaded = build_untrained(tiny_config)
        ModelManager.put_model(tmp_path / "model.pt", loaded)

        assert ModelManager.get_model(tmp_path / "model.pt") is loaded
        memory = ModelManager.get_memory_usage()
        assert memory["models_count"] == 1
        assert memory["parameters"] == sum(p.numel() for p in loaded.model.parameters())
        assert memory["paths"] == [str((tmp_path / "model.pt").resolve())]

    def test_loads_once(self, tmp_path, tiny_config):
        """Test that a checkpoint file is read once and then served from the cache."""
        loaded = build_untrained(tiny_config)
        path = save_checkpoint(
            tmp_path / "model.pt", loaded.model, tiny_config, loaded.vocab, loaded.schedule
        )

        first = ModelManager.get_model(path)
        assert ModelManager.get_model(path) is first
        assert first.vocab.hash == loaded.vocab.hash

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ModelManager.get_model(tmp_path / "absent.pt")
        assert_memory_cleared(ModelManager.get_memory_usage())

    def test_clear_all(self, tmp_path, tiny_config):
        """Test memory cleanup functionality."""
        ModelManager.put_model(tmp_path / "a.pt", build_untrained(tiny_config))
        ModelManager.clear_all()
        assert_memory_cleared(ModelManager.get_memory_usage())
