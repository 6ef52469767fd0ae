"""
Excess Risk - 目标域超额风险

R(β) = E_T[ℓ(x, y, β) − ℓ(x, y, β*)]

- 线性回归且目标二阶矩已知: 闭式 ½(β − β*)ᵀ Σ_T (β − β*)
- 其他情况: Monte Carlo，配对差分 (同一批 (x, y) 计算两个损失)
  conditional=True 时对 y | x 解析积分，只剩协变量的 Monte Carlo 误差

使用方式:
    from src.risk import excess_risk

    rv = excess_risk(model, target, beta_hat, beta_star, m=10000, rng=rng)
    print(rv.value, rv.standard_error, rv.method)
"""

import logging
from typing import Optional

import numpy as np

from .core.base import ModelFamily
from .core.errors import InvalidArgument, Unsupported
from .core.types import ModelKind, RiskMethod, RiskValue, as_vector
from .covariates.distributions import CovariateDistribution
from .fisher import fisher_closed_form
from .models.truth import ResponseTruth, WellSpecifiedTruth

logger = logging.getLogger(__name__)

MIN_MONTE_CARLO = 1000


def excess_risk_closed(
    model: ModelFamily,
    target_dist: CovariateDistribution,
    beta,
    beta_star,
) -> RiskValue:
    """
    闭式超额风险 ½δᵀΣ_Tδ，δ = β − β*

    Raises:
        Unsupported: 非线性回归，或目标二阶矩没有闭式
    """
    if model.kind != ModelKind.LINEAR:
        raise Unsupported(f"no closed-form excess risk for {type(model).__name__}")
    beta = as_vector(beta, "beta", target_dist.d)
    beta_star = as_vector(beta_star, "beta_star", target_dist.d)
    # 线性模型的 Fisher 就是 E[xxᵀ]
    sigma_t = fisher_closed_form(model, target_dist, beta_star)
    delta = beta - beta_star
    return RiskValue(float(0.5 * delta @ sigma_t @ delta), 0.0, RiskMethod.CLOSED)


def excess_risk_mc(
    model: ModelFamily,
    target_dist: CovariateDistribution,
    beta,
    beta_star,
    m: int,
    rng: np.random.Generator,
    conditional: bool = True,
    truth: Optional[ResponseTruth] = None,
) -> RiskValue:
    """
    Monte Carlo 超额风险 (配对差分)

    Args:
        conditional: True 时使用 E[ℓ(β) − ℓ(β*) | x] 的解析式 (需要良设定)；
            False 时在同一批 (x, y) 上做原始损失差
        truth: 原始差分模式下的响应分布，缺省为 β* 处的良设定分布

    标准误为差分样本的 std(ddof=1)/√m；β = β* 时差分恒为 0。
    """
    if int(m) < MIN_MONTE_CARLO:
        raise InvalidArgument(f"Monte Carlo size m must be >= {MIN_MONTE_CARLO}, got {m}")
    m = int(m)
    beta = as_vector(beta, "beta", target_dist.d)
    beta_star = as_vector(beta_star, "beta_star", target_dist.d)

    X = target_dist.sample_batch(m, rng)
    if conditional:
        if truth is not None and not isinstance(truth, WellSpecifiedTruth):
            raise Unsupported("conditional excess risk needs a well-specified truth")
        diffs = model.expected_loss_gap(X @ beta, X @ beta_star)
    else:
        truth = truth if truth is not None else WellSpecifiedTruth(model, beta_star)
        y = truth.sample(X, rng)
        diffs = model.losses(X, y, beta) - model.losses(X, y, beta_star)

    value = float(np.mean(diffs))
    se = float(np.std(diffs, ddof=1) / np.sqrt(m))
    return RiskValue(value, se, RiskMethod.MONTE_CARLO)


def excess_risk(
    model: ModelFamily,
    target_dist: CovariateDistribution,
    beta,
    beta_star,
    m: int = 10_000,
    rng: Optional[np.random.Generator] = None,
    conditional: bool = True,
) -> RiskValue:
    """有闭式用闭式，否则 Monte Carlo"""
    if model.kind == ModelKind.LINEAR:
        try:
            return excess_risk_closed(model, target_dist, beta, beta_star)
        except Unsupported:
            logger.debug(f"no closed-form target moment for {target_dist!r}, using Monte Carlo")
    if rng is None:
        raise InvalidArgument("Monte Carlo excess risk needs an explicit rng")
    return excess_risk_mc(model, target_dist, beta, beta_star, m, rng, conditional=conditional)


__all__ = [
    "excess_risk",
    "excess_risk_closed",
    "excess_risk_mc",
]
