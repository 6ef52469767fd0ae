"""
Core Module - 核心模块

包含:
- types: 类型定义 (观测、数据集、估计、Fisher 对、试验结果)
- errors: 异常层次
- base: 模型族基类
- linalg: 小规模对称正定矩阵的求解
- restart: 多起点重启策略
"""

from .base import ModelFamily
from .errors import (
    ConfigError,
    CovShiftError,
    DegenerateGaussianDraw,
    DegenerateWeights,
    DeltaOutOfRange,
    DimensionMismatch,
    InsufficientGrid,
    InvalidArgument,
    NotConverged,
    SingularDesign,
    SingularSource,
    SpectralFailure,
    Unsupported,
    UnsupportedPair,
)
from .restart import (
    SCHEDULE_NAMES,
    SINGLE_START,
    RestartConfig,
    constant_schedule,
    geometric_schedule,
    jittered_schedule,
    linear_schedule,
    redraw,
    restart_config_for,
    schedule_by_name,
)
from .types import (
    Dataset,
    Estimate,
    EstimatorKind,
    FisherPair,
    FitOptions,
    ModelKind,
    Observation,
    RateReport,
    RiskMethod,
    RiskValue,
    SphereEigs,
    StepRule,
    TrialResult,
    WeightedPair,
    as_vector,
)

__all__ = [
    # Types
    "ModelKind",
    "EstimatorKind",
    "StepRule",
    "RiskMethod",
    "Observation",
    "Dataset",
    "FitOptions",
    "Estimate",
    "FisherPair",
    "WeightedPair",
    "SphereEigs",
    "RiskValue",
    "TrialResult",
    "RateReport",
    "as_vector",
    # Base
    "ModelFamily",
    # Errors
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
    # Restart
    "RestartConfig",
    "redraw",
    "restart_config_for",
    "constant_schedule",
    "linear_schedule",
    "geometric_schedule",
    "jittered_schedule",
    "schedule_by_name",
    "SCHEDULE_NAMES",
    "SINGLE_START",
]
