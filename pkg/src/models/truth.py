"""
Response Truths - 数据生成过程

模型族负责损失和导数；数据的真实条件分布由 truth 给出。良设定时
truth 就是模型自身在 β* 处的采样器，误设定实验使用分段线性或二次真值。
"""

from abc import ABC, abstractmethod

import numpy as np

from ..core.base import ModelFamily
from ..core.errors import InvalidArgument
from ..core.types import as_vector


class ResponseTruth(ABC):
    """y | x 的真实条件分布"""

    @abstractmethod
    def sample(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        pass


class WellSpecifiedTruth(ResponseTruth):
    """良设定: y | x 来自模型族本身，参数为 β*"""

    def __init__(self, model: ModelFamily, beta_star):
        self.model = model
        self.beta_star = as_vector(beta_star, "beta_star")

    def sample(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.model.sample_responses(X, self.beta_star, rng)


class BallPiecewiseTruth(ResponseTruth):
    """
    球-壳构造: ‖x‖ ≤ radius 时 y = xᵀβ₁* + ε，否则 y = xᵀβ₂* + ε

    目标域支撑在内球上，因此目标最优参数为 β₁*
    """

    def __init__(self, beta_inner, beta_outer, radius: float = 1.0, noise_scale: float = 1.0):
        self.beta_inner = as_vector(beta_inner, "beta_star")
        self.beta_outer = as_vector(beta_outer, "beta_star_outer", self.beta_inner.size)
        if radius <= 0:
            raise InvalidArgument("radius must be > 0")
        self.radius = float(radius)
        self.noise_scale = float(noise_scale)

    def sample(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        inside = np.linalg.norm(X, axis=1) <= self.radius
        mean = np.where(inside, X @ self.beta_inner, X @ self.beta_outer)
        return mean + self.noise_scale * rng.standard_normal(X.shape[0])


class QuadraticTruth(ResponseTruth):
    """一维二次真值 y = x² + ε (线性模型误设定)"""

    def __init__(self, noise_scale: float = 1.0):
        self.noise_scale = float(noise_scale)

    def sample(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        x = X[:, 0]
        return x * x + self.noise_scale * rng.standard_normal(x.size)
