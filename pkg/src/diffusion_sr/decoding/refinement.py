"""
BFGS refinement of expression constants.

The fitting loss is the mean squared error on the training points. Its
gradient with respect to the constants comes from reverse-mode
differentiation of the expression tree in float64.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import torch
from scipy.optimize import minimize

from ..bench.metrics import r2
from ..config.run_config import DecodeConfig
from ..data.points import PointSet
from ..errors import RefinementFailedError
from ..symbolic.expression import (
    Expression,
    evaluate_batch,
    evaluate_torch,
    fill_placeholders,
    parameters,
    with_parameters,
)

logger = logging.getLogger(__name__)

INVALID_LOSS = 1e100


@dataclass
class RefinementResult:
    expression: Expression
    train_r2: float
    constants: list[float]
    refined: bool


def fitting_loss(
    expr: Expression, points: PointSet
) -> Callable[[np.ndarray], tuple[float, np.ndarray]]:
    """MSE over ``points`` and its gradient, as a function of the constants.

    Non-finite losses are reported as a large finite value with a zero
    gradient so BFGS backs off instead of failing.
    """
    Z = torch.as_tensor(points.Z, dtype=torch.float64)
    y = torch.as_tensor(points.y, dtype=torch.float64)

    def loss(theta: np.ndarray) -> tuple[float, np.ndarray]:
        params = torch.tensor(np.asarray(theta, dtype=float), dtype=torch.float64, requires_grad=True)
        value = torch.mean((evaluate_torch(expr, Z, params) - y) ** 2)
        if not torch.isfinite(value):
            return INVALID_LOSS, np.zeros_like(theta, dtype=float)
        value.backward()
        grad = params.grad.detach().numpy().copy()
        if not np.isfinite(grad).all():
            return INVALID_LOSS, np.zeros_like(theta, dtype=float)
        return float(value.item()), grad

    return loss


def _score(expr: Expression, points: PointSet, theta: Optional[np.ndarray] = None) -> float:
    predicted = evaluate_batch(expr, points.Z, constants_override=theta)
    return r2(points.y, predicted)


def _minimize_from(
    loss: Callable[[np.ndarray], tuple[float, np.ndarray]],
    start: np.ndarray,
    config: DecodeConfig,
) -> np.ndarray:
    result = minimize(
        loss,
        start,
        jac=True,
        method="BFGS",
        options={"maxiter": config.bfgs_maxiter, "gtol": config.bfgs_gtol},
    )
    if not np.isfinite(result.x).all() or result.fun >= INVALID_LOSS:
        raise RefinementFailedError(f"BFGS ended at an invalid point: {result.message}")
    return np.asarray(result.x, dtype=float)


def refine_constants(
    expr: Expression,
    points: PointSet,
    config: Optional[DecodeConfig] = None,
    seed: int = 0,
) -> RefinementResult:
    """Fit the constants of ``expr`` to ``points`` by multi-start BFGS.

    Placeholders start at ``config.placeholder_value``. The starting point
    itself is kept as a candidate, so the returned train R^2 is never below
    that of the unrefined expression. When no start evaluates anywhere the
    input expression is returned with its raw R^2.
    """
    config = config or DecodeConfig()
    expr = fill_placeholders(expr, config.placeholder_value)
    theta0 = parameters(expr)
    initial_r2 = _score(expr, points)
    if theta0.size == 0:
        return RefinementResult(expr, initial_r2, [], refined=False)

    loss = fitting_loss(expr, points)
    rng = np.random.default_rng(seed)
    starts = [theta0] + [
        rng.uniform(config.restart_low, config.restart_high, size=theta0.size)
        for _ in range(config.restarts)
    ]
    best_theta, best_r2 = theta0, initial_r2
    for i, start in enumerate(starts):
        try:
            theta = _minimize_from(loss, start, config)
        except RefinementFailedError as e:
            logger.debug(f"Refinement start {i} of {expr} failed: {e}")
            continue
        score = _score(expr, points, theta)
        if score > best_r2:
            best_theta, best_r2 = theta, score

    if not math.isfinite(best_r2):
        logger.warning(f"Refinement failed for {expr}; no start evaluates on the training points")
        return RefinementResult(expr, initial_r2, theta0.tolist(), refined=False)
    refined = with_parameters(expr, best_theta)
    return RefinementResult(refined, best_r2, [float(v) for v in best_theta], refined=best_theta is not theta0)
