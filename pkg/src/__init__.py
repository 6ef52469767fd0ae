"""
Covariate Shift Lab
协变量偏移下的估计实验框架

支持：
- 线性回归 / 逻辑回归 / 相位恢复三个模型族
- 高斯、球面 (可平移)、实心球三类协变量分布
- MLE、加权 MLE (MWLE)、约束 MLE、相位恢复 MLE
- Fisher 信息 (闭式 / Monte Carlo)、迁移迹、样本量门槛
- van Trees 下界与向量浓缩检查
- 带种子的 Monte Carlo 实验、速率拟合、误设定演示

快速开始:
    import numpy as np
    from src import GaussianCovariate, LinearRegression, fit_mle, excess_risk
    from src.core.types import Dataset

    rng = np.random.default_rng(0)
    beta_star = np.array([1.0, 0.0, 0.0])
    source = GaussianCovariate(mean=[0, 0, 0])
    target = GaussianCovariate(mean=[2, 0, 0])

    model = LinearRegression()
    X = source.sample_batch(1000, rng)
    y = model.sample_responses(X, beta_star, rng)
    est = fit_mle(model, Dataset(X, y))
    print(excess_risk(model, target, est.beta_hat, beta_star).value)

    # 命令行
    # covshift simulate --config configs/linear.cfg --seed 42 --out r.csv
    # covshift rate --in r.csv
"""

__version__ = "0.1.0"

from .bounds import (
    RadiiInputs,
    concentration_check,
    concentration_threshold,
    localization_radii,
    van_trees_bound,
)
from .core.errors import ConfigError, CovShiftError
from .core.types import (
    Dataset,
    Estimate,
    EstimatorKind,
    FisherPair,
    FitOptions,
    ModelKind,
    Observation,
    TrialResult,
)
from .covariates import BallUniform, GaussianCovariate, ShiftPair, SphereShifted
from .estimators import (
    aligned_distance,
    fit_constrained_mle,
    fit_mle,
    fit_mwle,
    fit_phase_retrieval,
)
from .fisher import (
    fisher_closed_form,
    fisher_monte_carlo,
    sample_size_threshold,
    transfer_trace,
    weighted_information,
)
from .harness import load_config, rate_fit, run_experiment
from .models import LinearRegression, LogisticRegression, PhaseRetrieval, get_model
from .risk import excess_risk
from .utils.logger import get_logger, init_logging, set_level

__all__ = [
    # Version
    "__version__",
    # Types
    "ModelKind",
    "EstimatorKind",
    "Observation",
    "Dataset",
    "FitOptions",
    "Estimate",
    "FisherPair",
    "TrialResult",
    "CovShiftError",
    "ConfigError",
    # Models
    "get_model",
    "LinearRegression",
    "LogisticRegression",
    "PhaseRetrieval",
    # Covariates
    "GaussianCovariate",
    "SphereShifted",
    "BallUniform",
    "ShiftPair",
    # Estimators
    "fit_mle",
    "fit_mwle",
    "fit_constrained_mle",
    "fit_phase_retrieval",
    "aligned_distance",
    # Fisher / risk
    "fisher_closed_form",
    "fisher_monte_carlo",
    "transfer_trace",
    "weighted_information",
    "sample_size_threshold",
    "excess_risk",
    # Bounds
    "RadiiInputs",
    "localization_radii",
    "van_trees_bound",
    "concentration_threshold",
    "concentration_check",
    # Harness
    "load_config",
    "run_experiment",
    "rate_fit",
    # Logging
    "get_logger",
    "init_logging",
    "set_level",
]
