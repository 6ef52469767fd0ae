"""
Mis-specification Demo - 误设定下 MLE 与 MWLE 的对比

一维线性模型 y ≈ xβ 拟合二次真值 y = x² + ε:
    源域 N(−μ, 1)，目标域 N(μ, 1)，w(x) = e^{2μx}
    目标最优 β* = E_T[x³]/E_T[x²] = (μ³ + 3μ)/(μ² + 1)
MLE 收敛到源域的对应值 −β*，MWLE 收敛到 β*。
"""

from dataclasses import dataclass

import numpy as np

from ..core.errors import InvalidArgument
from ..core.types import Dataset, as_vector
from ..covariates.distributions import GaussianCovariate
from ..covariates.shift import ShiftPair
from ..estimators import fit_mle, fit_mwle
from ..models import LinearRegression
from ..models.truth import QuadraticTruth
from ..utils.logger import get_logger

logger = get_logger(__name__)

MIN_SAMPLES = 100


@dataclass(frozen=True)
class MisspecResult:
    mu: float
    n: int
    beta_mle: float
    beta_mwle: float
    beta_star: float


def quadratic_target_optimum(mu: float) -> float:
    """(μ³ + 3μ)/(μ² + 1)"""
    return (mu ** 3 + 3.0 * mu) / (mu ** 2 + 1.0)


def misspec_demo(mu: float, n: int, rng: np.random.Generator) -> MisspecResult:
    """
    在同一批源域样本上拟合 MLE 与 MWLE

    μ = 0 时两个分布相同，权重恒为 1，两个估计完全一致
    """
    if mu < 0:
        raise InvalidArgument(f"mu must be >= 0, got {mu}")
    if n < MIN_SAMPLES:
        raise InvalidArgument(f"n must be >= {MIN_SAMPLES}, got {n}")

    pair = ShiftPair(GaussianCovariate([-mu]), GaussianCovariate([mu]))
    X = pair.source.sample_batch(int(n), rng)
    y = QuadraticTruth().sample(X, rng)
    data = Dataset(X, y)

    model = LinearRegression()
    mle = fit_mle(model, data)
    mwle = fit_mwle(model, data, pair.density_ratios(X))

    result = MisspecResult(
        mu=float(mu),
        n=int(n),
        beta_mle=float(mle.beta_hat[0]),
        beta_mwle=float(mwle.beta_hat[0]),
        beta_star=quadratic_target_optimum(mu),
    )
    logger.debug(
        f"misspec μ={mu}: MLE={result.beta_mle:.4f} MWLE={result.beta_mwle:.4f} β*={result.beta_star:.4f}"
    )
    return result


def ball_population_mle(W: float, d: int, beta_inner, beta_outer) -> np.ndarray:
    """
    球-壳构造下 MLE 的总体极限

    源域 Ball(W^{1/d})，内球 Q = Ball(1) 上真值为 β₁*，外部为 β₂*；
    加权正规方程给出 c·β₁* + (1 − c)·β₂*，c = 1/(W·ρ²)，ρ² = W^{2/d}
    """
    if W < 1:
        raise InvalidArgument(f"W must be >= 1, got {W}")
    beta_inner = as_vector(beta_inner, "beta_inner", int(d))
    beta_outer = as_vector(beta_outer, "beta_outer", int(d))
    c = 1.0 / (W * W ** (2.0 / d))
    return c * beta_inner + (1.0 - c) * beta_outer


__all__ = [
    "MisspecResult",
    "quadratic_target_optimum",
    "misspec_demo",
    "ball_population_mle",
]
