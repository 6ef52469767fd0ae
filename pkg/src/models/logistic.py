"""
Logistic Regression - 逻辑回归模型族

损失 ℓ = log(1 + e^{xᵀβ}) − y·xᵀβ，对应 P(Y=1 | x) = 1/(1 + e^{−xᵀβ})。
"""

import numpy as np
from scipy.special import expit

from ..core.base import ModelFamily
from ..core.errors import InvalidArgument
from ..core.types import ModelKind


def log1pexp(t: np.ndarray) -> np.ndarray:
    """log(1 + e^t)，大 |t| 时数值稳定"""
    return np.logaddexp(0.0, t)


def logistic_curvature(t: np.ndarray) -> np.ndarray:
    """1/(2 + e^t + e^{−t}) = σ(t)(1 − σ(t))"""
    p = expit(t)
    return p * (1.0 - p)


class LogisticRegression(ModelFamily):
    """逻辑回归；响应必须恰为 0 或 1"""

    kind = ModelKind.LOGISTIC

    def validate_responses(self, y: np.ndarray) -> None:
        if not np.all((y == 0.0) | (y == 1.0)):
            raise InvalidArgument("logistic responses must be exactly 0 or 1")

    def margin_loss(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return log1pexp(t) - y * t

    def margin_score(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return expit(t) - y

    def margin_curvature(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return logistic_curvature(t)

    def draw_responses(self, t_star: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return (rng.random(t_star.shape) < expit(t_star)).astype(float)

    def expected_loss_gap(self, t: np.ndarray, t_star: np.ndarray) -> np.ndarray:
        # 两点期望: E[Y | x] = σ(t*)
        return log1pexp(t) - log1pexp(t_star) - expit(t_star) * (t - t_star)
