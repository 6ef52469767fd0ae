"""
Covshift Lab - Type Definitions
核心类型定义 - 标准化输入输出格式

设计原则：
1. 参数向量、协变量统一为 float64 的 numpy 数组，构造时即校验
2. 所有拟合返回统一的 Estimate，风险返回统一的 RiskValue
3. 矩阵对 (FisherPair / WeightedPair) 在构造时检查对称性与正定性
"""

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch, InvalidArgument, SingularSource
from .linalg import is_invertible

# 对称性 / 半正定判定容差
SYMMETRY_TOL = 1e-10


def as_vector(value: Any, name: str = "vector", dim: Optional[int] = None) -> np.ndarray:
    """转换为有限值的一维 float64 数组，可选校验维度"""
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgument(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} has non-finite entries")
    if dim is not None and arr.size != dim:
        raise DimensionMismatch(dim, arr.size, name)
    return arr


class ModelKind(Enum):
    """模型族"""
    LINEAR = "linear"
    LOGISTIC = "logistic"
    PHASE_RETRIEVAL = "phase"


class EstimatorKind(Enum):
    """估计器类型"""
    MLE = "mle"
    MWLE = "mwle"
    CONSTRAINED_MLE = "constrained_mle"
    PHASE_MLE = "phase_mle"


class StepRule(Enum):
    """凸模型的下降步长规则"""
    NEWTON_DAMPED = auto()    # 阻尼牛顿 + 回溯减半
    GRADIENT_FIXED = auto()   # 固定步长梯度下降 (FitOptions.step_size)


class RiskMethod(Enum):
    """超额风险的计算方式"""
    CLOSED = "closed"
    MONTE_CARLO = "monte_carlo"


# ==================== 观测数据 ====================

@dataclass(frozen=True)
class Observation:
    """单个样本 (x, y)"""
    x: np.ndarray
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x, "x"))
        y = float(self.y)
        if not np.isfinite(y):
            raise InvalidArgument("y must be finite")
        object.__setattr__(self, "y", y)

    @property
    def dim(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class Dataset:
    """
    批量样本: X 为 (n, d)，y 为 (n,)

    估计器内部只处理 Dataset；Observation 序列通过 as_dataset 转换
    """
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise InvalidArgument(f"X must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.size:
            raise DimensionMismatch(X.shape[0], y.size, "response count")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidArgument("dataset has non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(self.X[mask], self.y[mask])

    @classmethod
    def from_observations(cls, observations: Iterable[Observation]) -> "Dataset":
        obs = list(observations)
        if not obs:
            raise InvalidArgument("need at least one observation")
        d = obs[0].dim
        for o in obs:
            if o.dim != d:
                raise DimensionMismatch(d, o.dim, "x")
        return cls(np.vstack([o.x for o in obs]), np.array([o.y for o in obs]))


DataLike = Union[Dataset, Sequence[Observation]]


def as_dataset(data: DataLike) -> Dataset:
    """接受 Dataset 或 Observation 序列"""
    if isinstance(data, Dataset):
        return data
    return Dataset.from_observations(data)


# ==================== 拟合 ====================

@dataclass
class FitOptions:
    """
    拟合选项

    max_iterations 约束牛顿迭代；一阶方法 (投影梯度、相位恢复梯度下降)
    使用 max_gradient_iterations
    """
    max_iterations: int = 100
    grad_tol: float = 1e-10
    ridge: float = 1e-10
    step_rule: StepRule = StepRule.NEWTON_DAMPED
    step_size: Optional[float] = None
    restarts: int = 5
    max_gradient_iterations: int = 5000
    strict: bool = False
    trace: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be >= 1")
        if self.max_gradient_iterations < 1:
            raise InvalidArgument("max_gradient_iterations must be >= 1")
        if self.grad_tol < 0:
            raise InvalidArgument("grad_tol must be >= 0")
        if self.ridge < 0:
            raise InvalidArgument("ridge must be >= 0")
        if self.restarts < 1:
            raise InvalidArgument("restarts must be >= 1")
        if self.step_rule == StepRule.GRADIENT_FIXED:
            if self.step_size is None or self.step_size <= 0:
                raise InvalidArgument("GRADIENT_FIXED needs a positive step_size")


@dataclass
class Estimate:
    """拟合结果与收敛诊断"""
    beta_hat: np.ndarray
    converged: bool
    iterations: int
    final_grad_norm: float
    final_loss: float = float("nan")
    ridge_used: bool = False
    restarts_used: int = 0
    trace: Optional[Any] = None  # utils.debug.FitTrace

    @property
    def dim(self) -> int:
        return self.beta_hat.size

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta_hat": self.beta_hat.tolist(),
            "converged": self.converged,
            "iterations": self.iterations,
            "final_grad_norm": self.final_grad_norm,
            "final_loss": self.final_loss,
            "ridge_used": self.ridge_used,
            "restarts_used": self.restarts_used,
        }


# ==================== Fisher 矩阵对 ====================

def _check_symmetric_psd(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgument(f"{name} must be square, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise InvalidArgument(f"{name} is not symmetric")
    if np.linalg.eigvalsh(M)[0] < -SYMMETRY_TOL * scale:
        raise InvalidArgument(f"{name} is not positive semidefinite")
    return M


@dataclass(frozen=True)
class FisherPair:
    """源域 / 目标域 Fisher 信息矩阵 (I_S, I_T)"""
    I_S: np.ndarray
    I_T: np.ndarray

    def __post_init__(self):
        I_S = _check_symmetric_psd(self.I_S, "I_S")
        I_T = _check_symmetric_psd(self.I_T, "I_T")
        if I_S.shape != I_T.shape:
            raise DimensionMismatch(I_S.shape[0], I_T.shape[0], "I_T")
        object.__setattr__(self, "I_S", I_S)
        object.__setattr__(self, "I_T", I_T)

    @property
    def dim(self) -> int:
        return self.I_S.shape[0]


@dataclass(frozen=True)
class WeightedPair:
    """
    加权信息对 (G_w, H_w)

    G_w = E_S[w² ∇ℓ∇ℓᵀ]，H_w = E_S[w ∇²ℓ]；trace 为 Tr(G_w H_w⁻¹)
    """
    G_w: np.ndarray
    H_w: np.ndarray
    G_se: Optional[np.ndarray] = None
    H_se: Optional[np.ndarray] = None
    trace: float = float("nan")
    trace_se: float = float("nan")

    def __post_init__(self):
        G = _check_symmetric_psd(self.G_w, "G_w")
        H = np.asarray(self.H_w, dtype=float)
        if H.shape != G.shape:
            raise DimensionMismatch(G.shape[0], H.shape[0], "H_w")
        if not is_invertible(H):
            raise SingularSource("H_w is not invertible")
        object.__setattr__(self, "G_w", G)
        object.__setattr__(self, "H_w", H)

    @property
    def dim(self) -> int:
        return self.G_w.shape[0]


@dataclass(frozen=True)
class SphereEigs:
    """
    球面协变量下 Fisher 矩阵的特征结构

    I_S = λ1·uuᵀ + λ2·(I − uuᵀ)，u = β*/‖β*‖；
    目标域沿 β*⊥ 方向的特征值为 λ2 + r²λ3
    """
    lambda1: float
    lambda2: float
    lambda3: float
    d: int
    r: float = 0.0
    standard_errors: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.lambda3) <= 0:
            raise InvalidArgument("sphere eigenvalues must be positive")
        if self.d < 2:
            raise InvalidArgument("d must be >= 2")

    def source_matrix(self, u: np.ndarray) -> np.ndarray:
        u = as_vector(u, "direction", self.d)
        u = u / np.linalg.norm(u)
        return self.lambda2 * np.eye(self.d) + (self.lambda1 - self.lambda2) * np.outer(u, u)

    def target_matrix(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """v 为与 u 正交的偏移方向"""
        v = as_vector(v, "shift direction", self.d)
        v = v / np.linalg.norm(v)
        return self.source_matrix(u) + self.r ** 2 * self.lambda3 * np.outer(v, v)

    def transfer_trace(self) -> float:
        """Tr(I_T I_S⁻¹) = d + r²λ3/λ2"""
        return self.d + self.r ** 2 * self.lambda3 / self.lambda2


# ==================== 风险 ====================

@dataclass(frozen=True)
class RiskValue:
    """目标域超额风险"""
    value: float
    standard_error: float
    method: RiskMethod

    def is_consistent(self) -> bool:
        """超额风险非负 (允许 4 个标准误的噪声)"""
        return self.value >= -4.0 * self.standard_error


# ==================== 实验结果 ====================

@dataclass(frozen=True)
class TrialResult:
    """单次试验结果 (CSV 的一行)"""
    model: ModelKind
    d: int
    n: int
    trial_index: int
    estimator: EstimatorKind
    excess_risk: float
    excess_risk_se: float
    param_dist: float
    aligned_dist: float
    converged: bool
    seed: int

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.n, self.trial_index)


@dataclass
class RateReport:
    """log-log 速率拟合结果"""
    slope: float
    intercept: float
    r_squared: float
    normalized_levels: Dict[int, float] = field(default_factory=dict)
    mean_risk: Dict[int, float] = field(default_factory=dict)
    trials_per_n: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "normalized_levels": dict(self.normalized_levels),
            "mean_risk": dict(self.mean_risk),
            "trials_per_n": dict(self.trials_per_n),
        }
