"""
Covariate Distributions - 协变量分布

功能：
1. 各向同性高斯 N(mean, scale²·I)
2. 半径 √d 的球面均匀分布加平移 (shift)
3. 以原点为中心的实心球均匀分布

方向采样统一使用 g/‖g‖ (g 为标准高斯)；球内半径用 u^{1/d} 逆 CDF。
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Optional

import numpy as np

from ..core.errors import DegenerateGaussianDraw, InvalidArgument, Unsupported
from ..core.restart import redraw
from ..core.types import as_vector


class CovariateKind(Enum):
    """分布类型"""
    GAUSSIAN = "gaussian"
    SPHERE = "sphere"
    BALL = "ball"


@redraw(max_attempts=10)
def unit_directions(m: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """m 个 S^{d-1} 上的均匀方向"""
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateGaussianDraw("standard Gaussian draw is exactly zero")
    return g / norms[:, None]


class CovariateDistribution(ABC):
    """
    协变量分布基类

    子类需要实现 sample_batch 和 second_moment
    """

    kind: CovariateKind

    def __init__(self, d: int):
        if int(d) < 1:
            raise InvalidArgument("dimension d must be >= 1")
        self.d = int(d)

    @abstractmethod
    def sample_batch(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """采样 m 个点，返回 (m, d)"""
        pass

    @abstractmethod
    def second_moment(self) -> np.ndarray:
        """E[xxᵀ]；没有闭式时抛出 Unsupported"""
        pass

    @abstractmethod
    def same_as(self, other: "CovariateDistribution") -> bool:
        """两个分布是否相同"""
        pass

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """采样单个点"""
        return self.sample_batch(1, rng)[0]


class GaussianCovariate(CovariateDistribution):
    """N(mean, scale²·I_d)"""

    kind = CovariateKind.GAUSSIAN

    def __init__(self, mean, scale: float = 1.0, d: Optional[int] = None):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if d is not None and mean.size == 1:
            mean = np.full(int(d), float(mean[0]))
        mean = as_vector(mean, "mean", d)
        super().__init__(mean.size)
        if not scale > 0:
            raise InvalidArgument("Gaussian scale must be > 0")
        self.mean = mean
        self.scale = float(scale)

    def __repr__(self) -> str:
        return f"GaussianCovariate(mean={self.mean.tolist()}, scale={self.scale})"

    def sample_batch(self, m: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.scale * rng.standard_normal((m, self.d))

    def second_moment(self) -> np.ndarray:
        return np.outer(self.mean, self.mean) + self.scale ** 2 * np.eye(self.d)

    def log_density(self, X: np.ndarray) -> np.ndarray:
        """对数密度，省略 −(d/2)log 2π"""
        r2 = np.sum((X - self.mean) ** 2, axis=1)
        return -self.d * np.log(self.scale) - r2 / (2.0 * self.scale ** 2)

    def same_as(self, other: CovariateDistribution) -> bool:
        return (
            isinstance(other, GaussianCovariate)
            and other.d == self.d
            and other.scale == self.scale
            and np.array_equal(other.mean, self.mean)
        )


class SphereShifted(CovariateDistribution):
    """Uniform(S^{d-1}(√d)) + shift"""

    kind = CovariateKind.SPHERE

    def __init__(self, d: int, shift=None):
        super().__init__(d)
        self.shift = np.zeros(self.d) if shift is None else as_vector(shift, "shift", self.d)
        self.radius = float(np.sqrt(self.d))

    def __repr__(self) -> str:
        return f"SphereShifted(d={self.d}, shift_norm={self.shift_norm:.6g})"

    @property
    def shift_norm(self) -> float:
        return float(np.linalg.norm(self.shift))

    @property
    def is_centered(self) -> bool:
        return not np.any(self.shift)

    def sample_batch(self, m: int, rng: np.random.Generator) -> np.ndarray:
        return self.shift + self.radius * unit_directions(m, self.d, rng)

    def second_moment(self) -> np.ndarray:
        if not self.is_centered:
            raise Unsupported("no closed-form second moment used for a shifted sphere")
        return np.eye(self.d)

    def same_as(self, other: CovariateDistribution) -> bool:
        return (
            isinstance(other, SphereShifted)
            and other.d == self.d
            and np.array_equal(other.shift, self.shift)
        )


class BallUniform(CovariateDistribution):
    """以原点为中心、半径 radius 的实心球均匀分布"""

    kind = CovariateKind.BALL

    def __init__(self, d: int, radius: float = 1.0):
        super().__init__(d)
        if not radius > 0:
            raise InvalidArgument("ball radius must be > 0")
        self.radius = float(radius)

    def __repr__(self) -> str:
        return f"BallUniform(d={self.d}, radius={self.radius})"

    def sample_batch(self, m: int, rng: np.random.Generator) -> np.ndarray:
        directions = unit_directions(m, self.d, rng)
        u = rng.random(m)
        return (self.radius * u ** (1.0 / self.d))[:, None] * directions

    def second_moment(self) -> np.ndarray:
        # E‖x‖² = ρ²·d/(d+2)，各向同性
        return self.radius ** 2 / (self.d + 2) * np.eye(self.d)

    def same_as(self, other: CovariateDistribution) -> bool:
        return isinstance(other, BallUniform) and other.d == self.d and other.radius == self.radius


# ==================== 函数式接口 ====================

def sample_covariate(dist: CovariateDistribution, rng: np.random.Generator) -> np.ndarray:
    return dist.sample(rng)


def second_moment(dist: CovariateDistribution) -> np.ndarray:
    return dist.second_moment()


__all__ = [
    "CovariateKind",
    "CovariateDistribution",
    "GaussianCovariate",
    "SphereShifted",
    "BallUniform",
    "unit_directions",
    "sample_covariate",
    "second_moment",
]
