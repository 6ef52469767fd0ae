"""
Lower Bounds & Concentration - 下界与向量浓缩

功能：
1. 局部化半径 R0 / R1
2. van Trees 下界 (归一化的 minimax 下界、门槛 N0、先验平均形式)
3. 余弦乘积先验的逆 CDF 采样与密度
4. 误设定球-壳构造的下界
5. 向量浓缩门槛与经验覆盖率检查

使用方式:
    from src.bounds import van_trees_bound, concentration_threshold

    lb = van_trees_bound(pair, R1=0.25, d=3, n=1000)
    t = concentration_threshold(v=1, B=1, p=np.inf, n=10_000, delta=np.exp(-1))
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .core.errors import DeltaOutOfRange, InvalidArgument
from .core.linalg import cholesky, extreme_eigs, solve_psd, trace_solve
from .core.types import FisherPair, as_vector
from .covariates.distributions import unit_directions
from .utils.logger import log_context

logger = logging.getLogger(__name__)

PI2 = np.pi ** 2


# ==================== 局部化半径 ====================

@dataclass(frozen=True)
class RadiiInputs:
    """β0 处的 Fisher 矩阵、Hessian 的 Lipschitz 常数、三阶导上界和先验半径"""
    I_S0: np.ndarray
    I_T0: np.ndarray
    L_S: float
    L_T: float
    B3: float
    B: float

    def __post_init__(self):
        pair = FisherPair(self.I_S0, self.I_T0)
        cholesky(pair.I_S, name="I_S0")
        cholesky(pair.I_T, name="I_T0")
        object.__setattr__(self, "I_S0", pair.I_S)
        object.__setattr__(self, "I_T0", pair.I_T)
        for name in ("L_S", "L_T", "B3"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidArgument(f"{name} must be finite and >= 0, got {value}")
        if not (np.isfinite(self.B) and self.B > 0):
            raise InvalidArgument(f"prior radius B must be finite and > 0, got {self.B}")


def _ratio_or_inf(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else float("inf")


def localization_radii(inp: RadiiInputs) -> Tuple[float, float]:
    """
    R0 = min{λmin(I_S)²/(4L_S·λmax(I_S)), λmin(I_T)/(4B3 + 2L_T), B}
    R1 = ¼·√(λmin(I_T)/λmax(I_T))·R0

    分母为 0 的项按 +∞ 处理
    """
    s_min, s_max = extreme_eigs(inp.I_S0)
    t_min, t_max = extreme_eigs(inp.I_T0)

    R0 = min(
        _ratio_or_inf(s_min ** 2, 4.0 * inp.L_S * s_max),
        _ratio_or_inf(t_min, 4.0 * inp.B3 + 2.0 * inp.L_T),
        inp.B,
    )
    R1 = 0.25 * np.sqrt(t_min / t_max) * R0
    return float(R0), float(R1)


# ==================== van Trees ====================

def _trace_ratio(pair: FisherPair) -> Tuple[float, float]:
    """(Tr(I_T I_S⁻¹), Tr(I_T I_S⁻²))"""
    A = solve_psd(pair.I_S, pair.I_T, name="I_S")        # I_S⁻¹ I_T
    trace1 = float(np.trace(A))
    trace2 = float(np.trace(solve_psd(pair.I_S, A.T, name="I_S")))
    return trace1, trace2


def _check_n(n: int) -> int:
    if int(n) < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    return int(n)


def van_trees_bound(pair: FisherPair, R1: float, d: int, n: int) -> float:
    """
    归一化 minimax 下界

        1 / (16·(2n + π²d/R1² · Tr(I_T I_S⁻²)/Tr(I_T I_S⁻¹)))

    即 Tr(I_T I_S⁻¹)⁻¹·(最坏情况超额风险) 的下界
    """
    if not R1 > 0:
        raise InvalidArgument(f"R1 must be > 0, got {R1}")
    n = _check_n(n)
    trace1, trace2 = _trace_ratio(pair)
    return 1.0 / (16.0 * (2.0 * n + PI2 * d / R1 ** 2 * trace2 / trace1))


def van_trees_threshold(pair: FisherPair, R1: float, d: int) -> float:
    """van_trees_bound ≥ 1/(50n) 当且仅当 n ≥ N0 = 8C/9，C = π²d/R1²·Tr(I_T I_S⁻²)/Tr(I_T I_S⁻¹)"""
    if not R1 > 0:
        raise InvalidArgument(f"R1 must be > 0, got {R1}")
    trace1, trace2 = _trace_ratio(pair)
    return 8.0 / 9.0 * PI2 * d / R1 ** 2 * trace2 / trace1


def van_trees_bayes_bound(pair: FisherPair, B: float, n: int) -> float:
    """
    余弦先验 (半宽 B 的立方体) 下的 Bayes 风险下界 (I_S 与 β 无关时)

        Tr(I_T I_S⁻¹)² / (n·Tr(I_T I_S⁻¹) + π²/B²·Tr(I_T I_S⁻²))
    """
    if not B > 0:
        raise InvalidArgument(f"prior half-width B must be > 0, got {B}")
    n = _check_n(n)
    trace1, trace2 = _trace_ratio(pair)
    return trace1 ** 2 / (n * trace1 + PI2 / B ** 2 * trace2)


def misspec_lower_bound(W: float, d: int, R1: float, I_T0: np.ndarray, n: int) -> float:
    """球-壳构造: ¼·(Wd)² / (2nWd + π²W²d/R1²·Tr(I_T⁻¹))"""
    if not W >= 1:
        raise InvalidArgument(f"ratio bound W must be >= 1, got {W}")
    if not R1 > 0:
        raise InvalidArgument(f"R1 must be > 0, got {R1}")
    n = _check_n(n)
    I_T0 = np.asarray(I_T0, dtype=float)
    trace_inv = trace_solve(I_T0, np.eye(I_T0.shape[0]), name="I_T0")
    Wd = W * d
    return 0.25 * Wd ** 2 / (2.0 * n * Wd + PI2 * W ** 2 * d / R1 ** 2 * trace_inv)


# ==================== 余弦先验 ====================

def cosine_prior_sample(
    beta0,
    B: float,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> np.ndarray:
    """
    乘积余弦先验 f(x) = Π π/(4B)·cos(π/(2B)(x_i − β0_i)) 的逆 CDF 采样

    x_i = β0_i + (2B/π)·arcsin(2u − 1)，u ~ Uniform(0, 1)；
    size=None 返回 (d,)，否则 (size, d)
    """
    if not B > 0:
        raise InvalidArgument(f"prior half-width B must be > 0, got {B}")
    beta0 = as_vector(beta0, "beta0")
    shape = beta0.shape if size is None else (int(size), beta0.size)
    u = rng.random(shape)
    return beta0 + (2.0 * B / np.pi) * np.arcsin(2.0 * u - 1.0)


def cosine_prior_density(x, beta0, B: float) -> np.ndarray:
    """先验密度；支撑外为 0"""
    beta0 = as_vector(beta0, "beta0")
    z = np.atleast_2d(np.asarray(x, dtype=float)) - beta0
    inside = np.all(np.abs(z) <= B, axis=1)
    density = np.prod(np.pi / (4.0 * B) * np.cos(np.pi / (2.0 * B) * z), axis=1)
    return np.where(inside, density, 0.0)


# ==================== 向量浓缩 ====================

def _inv_p(p: float) -> float:
    if p == np.inf:
        return 0.0
    if p in (1, 2):
        return 1.0 / p
    raise InvalidArgument(f"tail exponent p must be 1, 2 or inf, got {p}")


def concentration_threshold(
    v: float,
    B: float,
    p: float,
    n: int,
    delta: float,
    c: float = 1.0,
) -> float:
    """
    c·(√(v·log(1/δ)/n) + B·(log n)^{1/p}·log(1/δ)/n)

    p = ∞ 时 (log n)^{1/p} 取 1

    Raises:
        DeltaOutOfRange: δ ∉ [n⁻¹⁰, e⁻¹]
    """
    n = _check_n(n)
    if v < 0 or not B > 0 or not c > 0:
        raise InvalidArgument("need v >= 0, B > 0 and c > 0")
    inv_p = _inv_p(p)
    # e⁻¹ 作为浮点输入时允许一个舍入误差
    if not (float(n) ** -10 <= delta <= np.exp(-1.0) * (1.0 + 1e-12)):
        raise DeltaOutOfRange(f"delta={delta} outside [n^-10, e^-1] for n={n}")

    log_term = np.log(1.0 / delta)
    log_n = np.log(n) ** inv_p if inv_p > 0 else 1.0
    return float(c * (np.sqrt(v * log_term / n) + B * log_n * log_term / n))


@dataclass(frozen=True)
class VectorGenerator:
    """
    均值为零的独立向量生成器

    v 为 E‖u‖² 的上界，(B, p) 为尾部类别；sample_mean 可直接给出
    (1/n)Σu_i 的精确分布抽样，省去逐个生成
    """
    name: str
    d: int
    v: float
    B: float
    p: float
    sample: Callable[[int, np.random.Generator], np.ndarray]
    sample_mean: Optional[Callable[[int, np.random.Generator], np.ndarray]] = None

    def draw_mean(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.sample_mean is not None:
            return self.sample_mean(n, rng)
        return self.sample(n, rng).mean(axis=0)


def bounded_sphere_generator(d: int) -> VectorGenerator:
    """半径 √d 的球面均匀分布: ‖u‖ = √d 恒成立，v = d，p = ∞"""
    d = int(d)
    radius = np.sqrt(d)
    return VectorGenerator(
        name="sphere",
        d=d,
        v=float(d),
        B=float(radius),
        p=np.inf,
        sample=lambda n, rng: radius * unit_directions(n, d, rng),
    )


def gaussian_generator(d: int) -> VectorGenerator:
    """N(0, I/d): E‖u‖² = 1，‖u‖ 为 1-次高斯，p = 2；均值精确服从 N(0, I/(dn))"""
    d = int(d)
    scale = 1.0 / np.sqrt(d)
    return VectorGenerator(
        name="gaussian",
        d=d,
        v=1.0,
        B=1.0,
        p=2.0,
        sample=lambda n, rng: scale * rng.standard_normal((n, d)),
        sample_mean=lambda n, rng: scale / np.sqrt(n) * rng.standard_normal(d),
    )


def concentration_check(
    generator: VectorGenerator,
    n: int,
    delta: float,
    trials: int,
    c: float,
    rng: np.random.Generator,
) -> float:
    """
    ‖(1/n)Σu_i‖₂ 超过 concentration_threshold 的试验比例

    trials 至少为 100/δ，保证比例的分辨率
    """
    n = _check_n(n)
    if trials < 100.0 / delta:
        raise InvalidArgument(f"trials must be >= 100/delta = {100.0 / delta:.0f}, got {trials}")
    threshold = concentration_threshold(generator.v, generator.B, generator.p, n, delta, c)

    with log_context(logger, "concentration_check", generator=generator.name, n=n, trials=trials) as ctx:
        exceed = 0
        for _ in range(int(trials)):
            if np.linalg.norm(generator.draw_mean(n, rng)) > threshold:
                exceed += 1
        ctx["exceedance"] = exceed / trials

    return exceed / trials


__all__ = [
    "RadiiInputs",
    "localization_radii",
    "van_trees_bound",
    "van_trees_threshold",
    "van_trees_bayes_bound",
    "misspec_lower_bound",
    "cosine_prior_sample",
    "cosine_prior_density",
    "concentration_threshold",
    "VectorGenerator",
    "bounded_sphere_generator",
    "gaussian_generator",
    "concentration_check",
]
