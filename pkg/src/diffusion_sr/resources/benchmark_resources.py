"""
Benchmark resources.
Provides read-only access to the shipped benchmark definitions via bench:// URIs.
"""

import logging
import urllib.parse
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

import pandas as pd

from ..models.model_manager import ModelManager

logger = logging.getLogger(__name__)

BENCHMARK_FILE = Path(__file__).with_name("benchmarks.csv")
SUITES = ("nguyen", "livermore", "constant", "jin")


@lru_cache(maxsize=1)
def benchmark_table() -> pd.DataFrame:
    """All benchmark rows in file order."""
    frame = pd.read_csv(BENCHMARK_FILE, dtype={"sampler": str, "name": str, "expression": str})
    frame["suite"] = frame["suite"].str.strip().str.lower()
    return frame


def get_benchmark_resource(uri: str) -> Dict[str, Any]:
    """
    Handle benchmark resource requests.

    Supported URIs:
    - bench://suites/list - Suite names with problem counts
    - bench://suite/<name> - Problem rows of one suite (or 'all')
    - bench://problem/<name> - One problem row, e.g. bench://problem/Nguyen-8
    - bench://system/memory - Checkpoint cache usage

    Args:
        uri: Resource URI like 'bench://suite/nguyen'

    Returns:
        Dict with resource_data or error
    """
    try:
        parsed = urllib.parse.urlparse(uri)
        if parsed.scheme != "bench":
            return {"error": f"Unsupported scheme: {parsed.scheme}. Expected 'bench'"}

        category = parsed.netloc
        resource = parsed.path.strip("/")
        if not category or not resource:
            return {
                "error": f"Invalid URI format: {uri}. Expected format: bench://category/resource"
            }

        if category == "suites":
            return _handle_suites_resource(resource)
        elif category == "suite":
            return _handle_suite_resource(resource)
        elif category == "problem":
            return _handle_problem_resource(resource)
        elif category == "system":
            return _handle_system_resource(resource)
        else:
            return {"error": f"Unknown resource category: {category}"}

    except Exception as e:
        logger.error(f"Error handling benchmark resource {uri}: {e}")
        return {"error": f"Failed to get resource: {str(e)}"}


def _handle_suites_resource(resource: str) -> Dict[str, Any]:
    if resource != "list":
        return {"error": f"Unknown suites resource: {resource}"}
    counts = benchmark_table().groupby("suite", sort=False).size()
    return {
        "resource_data": {
            "suites": {suite: int(counts.get(suite, 0)) for suite in SUITES},
            "total": int(counts.sum()),
        }
    }


def _handle_suite_resource(resource: str) -> Dict[str, Any]:
    name = resource.lower()
    table = benchmark_table()
    if name != "all" and name not in SUITES:
        return {"error": f"Unknown suite: {resource}. Expected one of {', '.join(SUITES)}, all"}
    rows = table if name == "all" else table[table["suite"] == name]
    return {"resource_data": rows.to_dict(orient="records")}


def _handle_problem_resource(resource: str) -> Dict[str, Any]:
    table = benchmark_table()
    match = table[table["name"].str.lower() == resource.lower()]
    if match.empty:
        return {"error": f"Unknown problem: {resource}"}
    return {"resource_data": match.iloc[0].to_dict()}


def _handle_system_resource(resource: str) -> Dict[str, Any]:
    if resource == "memory":
        return {"resource_data": ModelManager.get_memory_usage()}
    return {"error": f"Unknown system resource: {resource}"}
