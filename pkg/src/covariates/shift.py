"""
Shift Pairs - 源 / 目标分布对与密度比

w(x) = dP_T/dP_S(x)。支持:
- 高斯 / 高斯: 闭式指数
- 同心球 / 球 (目标在内): (ρ_S/ρ_T)^d · 1{‖x‖ ≤ ρ_T}
- 相同分布: w ≡ 1

平移球面之间互相奇异，不支持密度比 (只能用 MLE)。
"""

from dataclasses import dataclass

import numpy as np

from ..core.errors import DimensionMismatch, UnsupportedPair
from ..core.types import as_vector
from .distributions import BallUniform, CovariateDistribution, GaussianCovariate


@dataclass(frozen=True)
class ShiftPair:
    """协变量偏移对"""
    source: CovariateDistribution
    target: CovariateDistribution

    def __post_init__(self):
        if self.source.d != self.target.d:
            raise DimensionMismatch(self.source.d, self.target.d, "target distribution")

    @property
    def d(self) -> int:
        return self.source.d

    def density_ratios(self, X: np.ndarray) -> np.ndarray:
        """批量密度比 (m,)"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise DimensionMismatch(self.d, X.shape[1], "x")

        src, tgt = self.source, self.target
        if src.same_as(tgt):
            return np.ones(X.shape[0])

        if isinstance(src, GaussianCovariate) and isinstance(tgt, GaussianCovariate):
            return np.exp(tgt.log_density(X) - src.log_density(X))

        if isinstance(src, BallUniform) and isinstance(tgt, BallUniform):
            if tgt.radius > src.radius:
                raise UnsupportedPair("target ball is not contained in the source ball")
            W = (src.radius / tgt.radius) ** self.d
            inside = np.linalg.norm(X, axis=1) <= tgt.radius
            return np.where(inside, W, 0.0)

        raise UnsupportedPair(
            f"no density ratio for {type(src).__name__} -> {type(tgt).__name__}"
        )

    def ratio_bound(self) -> float:
        """sup_x w(x)；无界时为 inf"""
        src, tgt = self.source, self.target
        if src.same_as(tgt):
            return 1.0
        if isinstance(src, BallUniform) and isinstance(tgt, BallUniform):
            if tgt.radius > src.radius:
                raise UnsupportedPair("target ball is not contained in the source ball")
            return (src.radius / tgt.radius) ** self.d
        if isinstance(src, GaussianCovariate) and isinstance(tgt, GaussianCovariate):
            if tgt.scale < src.scale:
                # 有界: 在指数的最大值处取得
                s2, t2 = src.scale ** 2, tgt.scale ** 2
                shift = tgt.mean - src.mean
                log_peak = (
                    self.d * np.log(src.scale / tgt.scale)
                    + float(shift @ shift) / (2.0 * (s2 - t2))
                )
                return float(np.exp(log_peak))
            return float("inf")
        raise UnsupportedPair(
            f"no density ratio for {type(src).__name__} -> {type(tgt).__name__}"
        )


def density_ratio(pair: ShiftPair, x) -> float:
    """单点密度比 w(x)"""
    x = as_vector(x, "x", pair.d)
    return float(pair.density_ratios(x[None, :])[0])


def ball_pair(W: float, d: int, target_radius: float = 1.0) -> ShiftPair:
    """球-壳构造: 源 Ball(W^{1/d}·ρ_T)，目标 Ball(ρ_T)，sup w = W"""
    return ShiftPair(
        source=BallUniform(d, target_radius * W ** (1.0 / d)),
        target=BallUniform(d, target_radius),
    )


__all__ = ["ShiftPair", "density_ratio", "ball_pair"]
