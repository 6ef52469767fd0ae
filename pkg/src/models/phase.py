"""
Phase Retrieval - 实值相位恢复模型族

Y = (xᵀβ*)² + ε；损失 ℓ = ½(y − (xᵀβ)²)²，关于 β ↦ −β 对称。
"""

import numpy as np

from ..core.base import ModelFamily
from ..core.types import ModelKind


class PhaseRetrieval(ModelFamily):
    """相位恢复 (非凸)"""

    kind = ModelKind.PHASE_RETRIEVAL

    def margin_loss(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return 0.5 * (y - t * t) ** 2

    def margin_score(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return 2.0 * t ** 3 - 2.0 * t * y

    def margin_curvature(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return 6.0 * t * t - 2.0 * y

    def draw_responses(self, t_star: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return t_star * t_star + self.noise_scale * rng.standard_normal(t_star.shape)

    def expected_loss_gap(self, t: np.ndarray, t_star: np.ndarray) -> np.ndarray:
        return 0.5 * (t * t - t_star * t_star) ** 2
