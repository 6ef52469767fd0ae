# Model families
# 模型族实现

from typing import Union

import numpy as np

from ..core.base import ModelFamily
from ..core.types import ModelKind, Observation
from .linear import LinearRegression
from .logistic import LogisticRegression
from .phase import PhaseRetrieval
from .truth import BallPiecewiseTruth, QuadraticTruth, ResponseTruth, WellSpecifiedTruth


def get_model(kind: Union[ModelKind, str], noise_scale: float = 1.0) -> ModelFamily:
    """
    获取模型族实例

    Args:
        kind: ModelKind 或其取值 ("linear" / "logistic" / "phase")
        noise_scale: 线性 / 相位恢复的噪声标准差 (逻辑回归忽略)
    """
    kind = ModelKind(kind)

    if kind == ModelKind.LINEAR:
        return LinearRegression(noise_scale)
    elif kind == ModelKind.LOGISTIC:
        return LogisticRegression(noise_scale)
    elif kind == ModelKind.PHASE_RETRIEVAL:
        return PhaseRetrieval(noise_scale)
    else:
        raise NotImplementedError(f"Model {kind} is not supported")


# ==================== 函数式接口 ====================

def loss(model: ModelFamily, obs: Observation, beta) -> float:
    return model.loss(obs, beta)


def gradient(model: ModelFamily, obs: Observation, beta) -> np.ndarray:
    return model.gradient(obs, beta)


def hessian(model: ModelFamily, obs: Observation, beta) -> np.ndarray:
    return model.hessian(obs, beta)


def sample_response(model: ModelFamily, x, beta_star, rng: np.random.Generator) -> float:
    return model.sample_response(x, beta_star, rng)


__all__ = [
    "get_model",
    "ModelFamily",
    "LinearRegression",
    "LogisticRegression",
    "PhaseRetrieval",
    "ResponseTruth",
    "WellSpecifiedTruth",
    "BallPiecewiseTruth",
    "QuadraticTruth",
    "loss",
    "gradient",
    "hessian",
    "sample_response",
]
