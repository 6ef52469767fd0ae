"""
Covshift Lab - Base Model Family
模型族基类 - 定义损失 / 导数 / 响应采样接口

三个模型 (线性回归、逻辑回归、相位恢复) 的损失都只通过边际 t = xᵀβ
依赖参数，所以子类只需实现标量函数:

    ℓ(t, y)、∂ℓ/∂t、∂²ℓ/∂t² 和 y | t 的采样

梯度 = (∂ℓ/∂t)·x，Hessian = (∂²ℓ/∂t²)·xxᵀ 由基类统一组装。
"""

import logging
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidArgument
from .types import Dataset, ModelKind, Observation, as_vector

# 获取日志器
logger = logging.getLogger(__name__)


class ModelFamily(ABC):
    """
    参数模型族基类

    定义了所有模型必须实现的接口；
    损失省略与参数无关的常数 (如 ½log 2π)，不影响 argmin 和超额风险
    """

    kind: ModelKind

    def __init__(self, noise_scale: float = 1.0):
        if noise_scale < 0:
            raise InvalidArgument("noise_scale must be >= 0")
        self.noise_scale = float(noise_scale)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(noise_scale={self.noise_scale})"

    # ==================== 边际函数 (子类实现) ====================

    @abstractmethod
    def margin_loss(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        """ℓ 作为边际 t 的函数"""
        pass

    @abstractmethod
    def margin_score(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        """∂ℓ/∂t"""
        pass

    @abstractmethod
    def margin_curvature(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        """∂²ℓ/∂t²"""
        pass

    @abstractmethod
    def draw_responses(self, t_star: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """给定真边际 t* = xᵀβ* 采样 y"""
        pass

    @abstractmethod
    def expected_loss_gap(self, t: np.ndarray, t_star: np.ndarray) -> np.ndarray:
        """
        E[ℓ(t, Y) − ℓ(t*, Y) | x]，Y 按 t* 生成

        用于超额风险的条件期望估计
        """
        pass

    def validate_responses(self, y: np.ndarray) -> None:
        """校验响应取值；默认不限制"""
        pass

    # ==================== 批量接口 ====================

    @staticmethod
    def _margins(X: np.ndarray, beta: np.ndarray) -> np.ndarray:
        if X.shape[1] != beta.size:
            raise DimensionMismatch(X.shape[1], beta.size, "beta")
        return X @ beta

    def losses(self, X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """逐样本损失 (n,)"""
        return self.margin_loss(self._margins(X, beta), y)

    def gradients(self, X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """逐样本梯度 (n, d)"""
        return self.margin_score(self._margins(X, beta), y)[:, None] * X

    def curvatures(self, X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """逐样本 Hessian 系数 c_i，∇²ℓ_i = c_i x_i x_iᵀ"""
        return self.margin_curvature(self._margins(X, beta), y)

    def empirical_loss(
        self, data: Dataset, beta: np.ndarray, weights: Optional[np.ndarray] = None
    ) -> float:
        """(1/n) Σ w_i ℓ_i"""
        values = self.losses(data.X, data.y, beta)
        if weights is not None:
            values = weights * values
        return float(np.mean(values))

    def empirical_gradient(
        self, data: Dataset, beta: np.ndarray, weights: Optional[np.ndarray] = None
    ) -> np.ndarray:
        s = self.margin_score(self._margins(data.X, beta), data.y)
        if weights is not None:
            s = weights * s
        return data.X.T @ s / data.n

    def empirical_hessian(
        self, data: Dataset, beta: np.ndarray, weights: Optional[np.ndarray] = None
    ) -> np.ndarray:
        c = self.margin_curvature(self._margins(data.X, beta), data.y)
        if weights is not None:
            c = weights * c
        H = data.X.T @ (c[:, None] * data.X) / data.n
        return 0.5 * (H + H.T)

    def sample_responses(
        self, X: np.ndarray, beta_star: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        """对每一行 x 采样 y | x (真参数 β*)"""
        return self.draw_responses(self._margins(X, beta_star), rng)

    # ==================== 单样本接口 ====================

    def _check(self, obs: Observation, beta) -> np.ndarray:
        beta = as_vector(beta, "beta")
        if obs.dim != beta.size:
            raise DimensionMismatch(beta.size, obs.dim, "x")
        self.validate_responses(np.array([obs.y]))
        return beta

    def loss(self, obs: Observation, beta) -> float:
        beta = self._check(obs, beta)
        return float(self.margin_loss(np.array([obs.x @ beta]), np.array([obs.y]))[0])

    def gradient(self, obs: Observation, beta) -> np.ndarray:
        beta = self._check(obs, beta)
        s = self.margin_score(np.array([obs.x @ beta]), np.array([obs.y]))[0]
        return s * obs.x

    def hessian(self, obs: Observation, beta) -> np.ndarray:
        beta = self._check(obs, beta)
        c = self.margin_curvature(np.array([obs.x @ beta]), np.array([obs.y]))[0]
        return c * np.outer(obs.x, obs.x)

    def sample_response(self, x, beta_star, rng: np.random.Generator) -> float:
        x = as_vector(x, "x")
        beta_star = as_vector(beta_star, "beta_star")
        if x.size != beta_star.size:
            raise DimensionMismatch(beta_star.size, x.size, "x")
        return float(self.draw_responses(np.array([x @ beta_star]), rng)[0])
