"""
Test configuration and fixtures.
Models are tiny and corpora small so the suite runs on a CPU in minutes.
"""

import logging

import numpy as np
import pytest

from src.diffusion_sr.config.run_config import RunConfig
from src.diffusion_sr.data.points import PointSet
from src.diffusion_sr.models.model_manager import ModelManager

logger = logging.getLogger(__name__)


@pytest.fixture(autouse=True)
def clear_state():
    """
    ESSENTIAL: Clear cached models between tests.
    Automatically runs before and after each test to ensure clean state.
    """
    ModelManager.clear_all()
    yield
    ModelManager.clear_all()


@pytest.fixture
def tiny_config(tmp_path) -> RunConfig:
    """Run config small enough to train and sample in seconds."""
    return RunConfig.model_validate(
        {
            "output_dir": str(tmp_path / "out"),
            "workers": 1,
            "data": {"count": 12, "n_min": 20, "n_max": 30, "max_internal_nodes": 3},
            "model": {
                "d_embed": 8,
                "d_model": 16,
                "n_layers": 1,
                "n_heads": 2,
                "encoder_layers": 1,
                "encoder_heads": 2,
                "numeric_embed": 4,
                "ffn_multiplier": 2,
                "diffusion_steps": 10,
            },
            "train": {"steps": 3, "batch_size": 4, "max_points": 16, "log_every": 1},
            "decode": {"top_k": 3, "n_samples": 4, "restarts": 1, "bfgs_maxiter": 50},
            "gp": {
                "population": 20,
                "generations": 3,
                "init_min_height": 1,
                "init_max_height": 3,
                "max_height": 5,
            },
            "guidance": {"seed_size": 2, "islands": 2, "grow_height": 3},
        }
    )


@pytest.fixture
def quadratic_points() -> PointSet:
    """y = x^2 + x on 40 points of [-1, 1]."""
    x = np.linspace(-1.0, 1.0, 40)
    return PointSet(x.reshape(-1, 1), x**2 + x)


@pytest.fixture
def planar_points() -> PointSet:
    """y = x_1 * x_2 + 2 on a 2-d grid."""
    rng = np.random.default_rng(7)
    Z = rng.uniform(-2.0, 2.0, size=(60, 2))
    return PointSet(Z, Z[:, 0] * Z[:, 1] + 2.0)


# Test data validation helpers
def assert_success_response(response: dict):
    """Assert that a response indicates success."""
    assert response["status"] == "success", response.get("message")
    assert "data" in response
    assert "metadata" in response


def assert_error_response(response: dict):
    """Assert that a response indicates an error."""
    assert response["status"] == "error"
    assert "message" in response
    assert "error_type" in response


def assert_resource_response(response: dict):
    """Assert that a resource response is valid."""
    assert "resource_data" in response or "error" in response


def assert_memory_cleared(memory_usage: dict):
    """Assert that the model cache is empty."""
    assert memory_usage["models_count"] == 0
    assert memory_usage["parameters"] == 0
    assert memory_usage["paths"] == []
