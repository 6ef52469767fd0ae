"""
Linear Regression - 线性回归模型族

Y = xᵀβ* + ε, ε ~ N(0, σ_ε²)；损失 ℓ = ½(y − xᵀβ)² (省略 ½log 2π)
"""

import numpy as np

from ..core.base import ModelFamily
from ..core.types import ModelKind


class LinearRegression(ModelFamily):
    """
    线性回归

    noise_scale=0 时响应无噪声 (调试用，拟合应精确插值)
    """

    kind = ModelKind.LINEAR

    def margin_loss(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return 0.5 * (y - t) ** 2

    def margin_score(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return t - y

    def margin_curvature(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.ones_like(t)

    def draw_responses(self, t_star: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return t_star + self.noise_scale * rng.standard_normal(t_star.shape)

    def expected_loss_gap(self, t: np.ndarray, t_star: np.ndarray) -> np.ndarray:
        # 噪声交叉项期望为 0
        return 0.5 * (t - t_star) ** 2
