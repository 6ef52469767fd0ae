"""
Error Hierarchy - 异常类型

所有库内错误都继承 CovShiftError；数值域错误同时继承 ValueError，
方便通用调用方直接 except ValueError。

使用方式:
    from src.core.errors import CovShiftError, SingularSource

    try:
        trace = transfer_trace(pair)
    except SingularSource:
        ...
"""

from typing import Any, Optional


class CovShiftError(Exception):
    """库内所有错误的基类"""


# ==================== 输入 / 前置条件 ====================

class InvalidArgument(CovShiftError, ValueError):
    """参数不满足前置条件 (radius ≤ 0, m 低于 Monte Carlo 下限等)"""


class DimensionMismatch(CovShiftError, ValueError):
    """向量 / 矩阵维度不一致"""

    def __init__(self, expected: int, got: int, what: str = "vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected dimension {expected}, got {got}")


class DeltaOutOfRange(CovShiftError, ValueError):
    """置信水平 δ 超出 [n^-10, e^-1]"""


class ConfigError(CovShiftError, ValueError):
    """实验配置解析失败，key 指明出错的配置项"""

    def __init__(self, key: str, message: str = ""):
        self.key = key
        text = f"config key '{key}'"
        if message:
            text += f": {message}"
        super().__init__(text)


# ==================== 能力缺失 ====================

class Unsupported(CovShiftError):
    """请求的组合没有闭式实现，调用方应改用 Monte Carlo"""


class UnsupportedPair(Unsupported):
    """源 / 目标分布之间没有可用的密度比"""


# ==================== 数值失败 ====================

class DegenerateGaussianDraw(CovShiftError):
    """高斯方向采样得到零向量 (概率为零，重新采样)"""


class SingularDesign(CovShiftError):
    """线性回归设计矩阵加岭后仍然秩亏"""


class SingularSource(CovShiftError):
    """源域 Fisher 矩阵 (或 H_w) 不可逆"""


class DegenerateWeights(CovShiftError, ValueError):
    """正权重样本少于 d 个"""


class SpectralFailure(CovShiftError):
    """谱初始化的幂迭代停滞"""


class InsufficientGrid(CovShiftError, ValueError):
    """速率拟合所需的 n 网格或每格试验数不足"""


class NotConverged(CovShiftError):
    """
    迭代达到上限仍未收敛

    只有 FitOptions.strict=True 时才会抛出；estimate 保存未收敛的结果
    """

    def __init__(self, message: str, estimate: Optional[Any] = None):
        self.estimate = estimate
        super().__init__(message)


__all__ = [
    "CovShiftError",
    "InvalidArgument",
    "DimensionMismatch",
    "DeltaOutOfRange",
    "ConfigError",
    "Unsupported",
    "UnsupportedPair",
    "DegenerateGaussianDraw",
    "SingularDesign",
    "SingularSource",
    "DegenerateWeights",
    "SpectralFailure",
    "InsufficientGrid",
    "NotConverged",
]
