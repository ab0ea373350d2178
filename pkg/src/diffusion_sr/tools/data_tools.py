"""
Corpus generation and benchmark listing tools.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..config.run_config import RunConfig
from ..data.corpus import build_corpus
from ..errors import DataError
from ..resources.benchmark_resources import get_benchmark_resource
from .common import failure, output_dir_for, success, workers_for

logger = logging.getLogger(__name__)


def cmd_gen_data(config: RunConfig, output: Optional[str] = None) -> Dict[str, Any]:
    """
    Generates a synthetic corpus of (skeleton, full expression, points) records.

    Args:
        config: Run configuration; the ``data`` section drives generation
        output: Corpus path; defaults to ``corpus_path`` or the output dir

    Returns:
        Dict with status and corpus summary or error message
    """
    try:
        path = Path(output or config.corpus_path or output_dir_for(config, "gen-data") / "corpus.jsonl.gz")
        summary = build_corpus(
            config.data.count, config.data.seed, config.data, path, workers=workers_for(config)
        )
        return success(
            "cmd_gen_data",
            summary,
            schema_version=config.schema_version,
            mode=config.data.mode.value,
        )
    except Exception as e:
        return failure("cmd_gen_data", e, "generate corpus")


def cmd_list_problems(suite: str = "all") -> Dict[str, Any]:
    """
    Lists benchmark problems of a suite from the shipped definitions.

    Args:
        suite: nguyen, livermore, constant, jin or all

    Returns:
        Dict with status and problem rows or error message
    """
    try:
        resource = get_benchmark_resource(f"bench://suite/{suite}")
        if "error" in resource:
            raise DataError(resource["error"])
        return success("cmd_list_problems", resource["resource_data"], suite=suite)
    except Exception as e:
        return failure("cmd_list_problems", e, "list benchmark problems")
