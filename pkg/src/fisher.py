"""
Fisher Information - Fisher 信息矩阵与迹泛函

功能：
1. 闭式 Fisher 矩阵 (线性回归的二阶矩，相位恢复的球面特征结构)
2. Monte Carlo Fisher 矩阵 (逐元素标准误)
3. 球面协变量下逻辑回归 / 相位恢复的特征值 λ1, λ2, λ3
4. 加权信息对 (G_w, H_w) 与 Tr(G_w H_w⁻¹) 的 delta 方法标准误
5. 迹泛函 Tr(I_T I_S⁻¹) 与样本量门槛 N*

使用方式:
    from src.fisher import fisher_closed_form, transfer_trace
    from src.core.types import FisherPair

    I_S = fisher_closed_form(model, source, beta_star)
    I_T = fisher_closed_form(model, target, beta_star)
    trace = transfer_trace(FisherPair(I_S, I_T))

所有迹都经 Cholesky 求解得到，不显式求逆。
"""

import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .core.base import ModelFamily
from .core.errors import InvalidArgument, Unsupported
from .core.linalg import (
    cholesky,
    extreme_eigs,
    generalized_max_eig,
    inverse_psd,
    solve_psd,
    symmetrize,
    trace_solve,
)
from .core.types import FisherPair, ModelKind, SphereEigs, WeightedPair, as_vector
from .covariates.distributions import (
    BallUniform,
    CovariateDistribution,
    GaussianCovariate,
    SphereShifted,
)
from .covariates.shift import ShiftPair
from .models.logistic import logistic_curvature
from .models.truth import ResponseTruth, WellSpecifiedTruth
from .utils.logger import log_context

logger = logging.getLogger(__name__)

# Monte Carlo 最少样本数
MIN_MONTE_CARLO = 1000
# 分块累加，限制 (chunk, d, d) 级别的内存
MC_CHUNK = 50_000
# 平移方向与 β* 正交的容差
ORTHOGONALITY_TOL = 1e-10


def _check_m(m: int) -> int:
    if int(m) < MIN_MONTE_CARLO:
        raise InvalidArgument(f"Monte Carlo size m must be >= {MIN_MONTE_CARLO}, got {m}")
    return int(m)


def _weighted_moments(X: np.ndarray, c: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Σ c_i x_i x_iᵀ 与 Σ (c_i x_i x_iᵀ)² (逐元素)"""
    X2 = X * X
    return X.T @ (c[:, None] * X), X2.T @ ((c * c)[:, None] * X2)


def _mean_and_se(first: np.ndarray, second: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray]:
    mean = first / m
    var = (second / m - mean * mean) * m / (m - 1)
    return symmetrize(mean), np.sqrt(np.maximum(var, 0.0) / m)


# ==================== 闭式 Fisher ====================

def fisher_closed_form(
    model: ModelFamily,
    dist: CovariateDistribution,
    beta_star,
) -> np.ndarray:
    """
    闭式 Fisher 矩阵 E[∇²ℓ(x, y, β*)]

    支持:
    - 线性回归 × {高斯, 球面 (可平移), 实心球}: E[xxᵀ]
    - 相位恢复 × 球面 (不平移或平移方向 ⊥ β*): ‖β*‖² 乘球面特征结构

    Raises:
        Unsupported: 逻辑回归或其他组合，调用方改用 fisher_monte_carlo
    """
    beta_star = as_vector(beta_star, "beta_star", dist.d)

    if model.kind == ModelKind.LINEAR:
        if isinstance(dist, SphereShifted):
            # 中心化球面的二阶矩为 I，平移只加一个秩一项
            return np.eye(dist.d) + np.outer(dist.shift, dist.shift)
        if isinstance(dist, (GaussianCovariate, BallUniform)):
            return dist.second_moment()
        raise Unsupported(f"no closed-form Fisher for linear model on {dist!r}")

    if model.kind == ModelKind.PHASE_RETRIEVAL:
        if not isinstance(dist, SphereShifted):
            raise Unsupported(f"no closed-form Fisher for phase retrieval on {dist!r}")
        b = float(np.linalg.norm(beta_star))
        if b == 0.0:
            return np.zeros((dist.d, dist.d))
        u = beta_star / b
        r = dist.shift_norm
        eigs = sphere_phase_eigs(dist.d, r=r)
        if dist.is_centered:
            return b * b * eigs.source_matrix(u)
        if abs(float(u @ dist.shift)) > ORTHOGONALITY_TOL * max(1.0, r):
            raise Unsupported("closed-form phase Fisher needs the shift orthogonal to beta_star")
        return b * b * eigs.target_matrix(u, dist.shift)

    raise Unsupported(f"{type(model).__name__} has no closed-form Fisher; use fisher_monte_carlo")


# ==================== Monte Carlo Fisher ====================

def fisher_monte_carlo(
    model: ModelFamily,
    dist: CovariateDistribution,
    beta_star,
    m: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Monte Carlo 估计 E[∇²ℓ(x, y, β*)]，y 由模型在 β* 处生成

    Returns:
        (对称化后的均值矩阵, 逐元素标准误)
    """
    m = _check_m(m)
    beta_star = as_vector(beta_star, "beta_star", dist.d)
    first = np.zeros((dist.d, dist.d))
    second = np.zeros((dist.d, dist.d))

    with log_context(logger, "fisher_monte_carlo", m=m, d=dist.d, model=model.kind.value):
        remaining = m
        while remaining > 0:
            k = min(MC_CHUNK, remaining)
            X = dist.sample_batch(k, rng)
            y = model.sample_responses(X, beta_star, rng)
            f, s = _weighted_moments(X, model.curvatures(X, y, beta_star))
            first += f
            second += s
            remaining -= k

    return _mean_and_se(first, second, m)


def fisher_matrix(
    model: ModelFamily,
    dist: CovariateDistribution,
    beta_star,
    m: int = 200_000,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """有闭式用闭式，否则 Monte Carlo (需要 rng)"""
    try:
        return fisher_closed_form(model, dist, beta_star)
    except Unsupported:
        if rng is None:
            raise
        logger.debug(f"no closed-form Fisher for {dist!r}, using Monte Carlo (m={m})")
        return fisher_monte_carlo(model, dist, beta_star, m, rng)[0]


def fisher_pair(
    model: ModelFamily,
    source: CovariateDistribution,
    target: CovariateDistribution,
    beta_star,
    m: int = 200_000,
    rng: Optional[np.random.Generator] = None,
) -> FisherPair:
    """(I_S, I_T)；Monte Carlo 估计会在进入 FisherPair 前投影到 PSD 锥"""
    I_S = fisher_matrix(model, source, beta_star, m, rng)
    I_T = fisher_matrix(model, target, beta_star, m, rng)
    return FisherPair(_clip_psd(I_S), _clip_psd(I_T))


def _clip_psd(M: np.ndarray) -> np.ndarray:
    eig, vec = np.linalg.eigh(symmetrize(M))
    if eig[0] >= 0:
        return symmetrize(M)
    return symmetrize((vec * np.maximum(eig, 0.0)) @ vec.T)


# ==================== 球面特征值 ====================

def sphere_phase_eigs(d: int, r: float = 0.0) -> SphereEigs:
    """相位恢复 (‖β*‖=1): (12d/(d+2), 4d/(d+2), 4)，闭式，标准误为 0"""
    d = int(d)
    if d < 2:
        raise InvalidArgument("d must be >= 2")
    return SphereEigs(
        lambda1=12.0 * d / (d + 2),
        lambda2=4.0 * d / (d + 2),
        lambda3=4.0,
        d=d,
        r=float(r),
    )


def sphere_logistic_eigs(
    d: int,
    r: float = 0.0,
    m: int = 10 ** 6,
    rng: Optional[np.random.Generator] = None,
    beta_norm: float = 1.0,
) -> SphereEigs:
    """
    逻辑回归在 Uniform(S^{d-1}(√d)) 上的特征值

    只需 x 在 β* 方向上的坐标 x1 = √d·g1/√(g1² + χ²_{d-1})：
        λ1 = E[x1²·s]，λ2 = E[(d − x1²)/(d − 1)·s]，λ3 = E[s]
    其中 s = σ(t)(1 − σ(t))，t = ‖β*‖·x1。取值与 r 无关，r 只记录在结果里。
    """
    d = int(d)
    if d < 2:
        raise InvalidArgument("d must be >= 2")
    m = _check_m(m)
    rng = rng if rng is not None else np.random.default_rng()

    with log_context(logger, "sphere_logistic_eigs", d=d, m=m):
        g1 = rng.standard_normal(m)
        rest = rng.chisquare(d - 1, m)
        x1 = np.sqrt(d) * g1 / np.sqrt(g1 * g1 + rest)
        s = logistic_curvature(beta_norm * x1)
        x1sq = x1 * x1
        samples = (x1sq * s, (d - x1sq) / (d - 1) * s, s)

    values = [float(np.mean(v)) for v in samples]
    errors = tuple(float(np.std(v, ddof=1) / np.sqrt(m)) for v in samples)
    logger.debug(
        f"logistic sphere eigs d={d}: λ1={values[0]:.5g} λ2={values[1]:.5g} λ3={values[2]:.5g}"
    )
    return SphereEigs(*values, d=d, r=float(r), standard_errors=errors)


# ==================== 迹泛函 ====================

def transfer_trace(pair: FisherPair) -> float:
    """Tr(I_T I_S⁻¹)"""
    return trace_solve(pair.I_S, pair.I_T, name="I_S")


def transfer_norm(pair: FisherPair) -> float:
    """‖I_T^{1/2} I_S⁻¹ I_T^{1/2}‖₂"""
    return generalized_max_eig(pair.I_T, pair.I_S, name="I_S")


def linear_transfer_trace(alpha, sigma: float) -> float:
    """源 N(0, I)、目标 N(α, σ²I) 的线性回归: ‖α‖² + σ²d"""
    alpha = as_vector(alpha, "alpha")
    return float(alpha @ alpha + sigma ** 2 * alpha.size)


def sphere_transfer_trace(eigs: SphereEigs, d: Optional[int] = None, r: Optional[float] = None) -> float:
    """球面平移: d + r²λ3/λ2"""
    d = eigs.d if d is None else int(d)
    r = eigs.r if r is None else float(r)
    return d + r * r * eigs.lambda3 / eigs.lambda2


def sphere_transfer_norm(eigs: SphereEigs) -> float:
    """球面平移时 ‖I_T I_S⁻¹‖₂ = 1 + r²λ3/λ2"""
    return 1.0 + eigs.r ** 2 * eigs.lambda3 / eigs.lambda2


# ==================== 加权信息对 ====================

def weighted_information(
    model: ModelFamily,
    pair: ShiftPair,
    beta_star,
    m: int,
    rng: np.random.Generator,
    truth: Optional[ResponseTruth] = None,
) -> WeightedPair:
    """
    Monte Carlo 估计 G_w = E_S[w²∇ℓ∇ℓᵀ] 与 H_w = E_S[w∇²ℓ]

    beta_star 为目标域最优参数；truth 缺省为模型在 beta_star 处的良设定分布。
    Tr(G_w H_w⁻¹) 的标准误用 delta 方法:
        ψ_i = w²s²·xᵀH⁻¹x − wc·xᵀH⁻¹GH⁻¹x

    Raises:
        UnsupportedPair: 分布对没有密度比
        SingularSource: H_w 不可逆
    """
    m = _check_m(m)
    beta_star = as_vector(beta_star, "beta_star", pair.d)
    truth = truth if truth is not None else WellSpecifiedTruth(model, beta_star)

    with log_context(logger, "weighted_information", m=m, d=pair.d):
        X = pair.source.sample_batch(m, rng)
        w = pair.density_ratios(X)
        y = truth.sample(X, rng)
        t = X @ beta_star
        gs = w * model.margin_score(t, y)
        hc = w * model.margin_curvature(t, y)

        G, G_se = _mean_and_se(*_weighted_moments(X, gs * gs), m)
        H, H_se = _mean_and_se(*_weighted_moments(X, hc), m)

        # d×d 小矩阵，ψ_i 的二次型需要显式的 H⁻¹
        A = inverse_psd(H, name="H_w")
        AGA = A @ G @ A
        quad_A = np.einsum("ij,jk,ik->i", X, A, X)
        quad_AGA = np.einsum("ij,jk,ik->i", X, AGA, X)
        psi = gs * gs * quad_A - hc * quad_AGA

    trace = trace_solve(H, G, name="H_w")
    trace_se = float(np.std(psi, ddof=1) / np.sqrt(m))
    logger.debug(f"Tr(G_w H_w⁻¹) = {trace:.6g} ± {trace_se:.3g}")
    return WeightedPair(G_w=G, H_w=H, G_se=G_se, H_se=H_se, trace=trace, trace_se=trace_se)


# ==================== 假设常数 ====================

class AssumptionConstants(NamedTuple):
    """(γ, B1, B2, B3, L_S, L_T)，绝对常数取 1"""
    gamma: float
    B1: float
    B2: float
    B3: float
    L_S: float
    L_T: float


def assumption_constants(kind, d: int, r: float = 0.0) -> AssumptionConstants:
    """
    三个模型的浓缩 / 光滑常数

    线性回归: γ=1, B1=B2=√d, B3=0, L=0
    逻辑回归: γ=0, B1=√d, B2=d, B3=L_T=(√d+r)³, L_S=d^{3/2}
    相位恢复 (‖β*‖=1): γ=1/2, B1=(√d+r)², B2=B3=L_T=(√d+r)⁴, L_S=d²
    """
    kind = ModelKind(kind)
    d = int(d)
    root = np.sqrt(d)
    radius = root + float(r)

    if kind == ModelKind.LINEAR:
        return AssumptionConstants(1.0, root, root, 0.0, 0.0, 0.0)
    if kind == ModelKind.LOGISTIC:
        return AssumptionConstants(0.0, root, float(d), radius ** 3, d ** 1.5, radius ** 3)
    return AssumptionConstants(0.5, radius ** 2, radius ** 4, radius ** 4, float(d * d), radius ** 4)


# ==================== 样本量门槛 ====================

def _log_factor(arg: float, gamma: float) -> float:
    if gamma == 0:
        return 1.0
    return abs(np.log(arg)) ** (2.0 * gamma)


def sample_size_threshold(B1: float, B2: float, B3: float, gamma: float, pair: FisherPair) -> float:
    """
    N* = (1 + κ̃/κ)²·max{κ̃⁻¹α1²·log^{2γ}((1 + κ̃/κ)κ̃⁻¹α1²), α2², κ̃(1 + ‖I_T^{1/2}I_S⁻¹I_T^{1/2}‖⁻²)α3²}

    κ = Tr(I_T I_S⁻¹)/‖I_T^{1/2}I_S⁻¹I_T^{1/2}‖，κ̃ = Tr(I_S⁻¹)/‖I_S⁻¹‖，
    α1 = B1‖I_S⁻¹‖^{1/2}，α2 = B2‖I_S⁻¹‖，α3 = B3‖I_S⁻¹‖^{3/2}
    """
    d = pair.dim
    lam_min, _ = extreme_eigs(pair.I_S)
    cholesky(pair.I_S, name="I_S")
    cholesky(pair.I_T, name="I_T")

    inv_norm = 1.0 / lam_min
    opnorm = transfer_norm(pair)
    kappa = transfer_trace(pair) / opnorm
    kappa_tilde = trace_solve(pair.I_S, np.eye(d), name="I_S") / inv_norm

    a1 = B1 * np.sqrt(inv_norm)
    a2 = B2 * inv_norm
    a3 = B3 * inv_norm ** 1.5
    ratio = 1.0 + kappa_tilde / kappa

    lead = a1 * a1 / kappa_tilde
    branches = (
        lead * _log_factor(ratio * lead, gamma) if lead > 0 else 0.0,
        a2 * a2,
        kappa_tilde * (1.0 + opnorm ** -2) * a3 * a3,
    )
    return float(ratio * ratio * max(branches))


def weighted_sample_size_threshold(
    B1: float, B2: float, B3: float, gamma: float, W: float, pair: WeightedPair
) -> float:
    """
    MWLE 的门槛 N* = W²·max{λ⁻¹α̃1² log^{2γ}(W²λ⁻¹α̃1²), α̃2², λα̃3²}

    α̃ 用 ‖H_w⁻¹‖ 替代 ‖I_S⁻¹‖，λ = Tr(G_w H_w⁻²)/‖H_w⁻¹‖
    """
    H = symmetrize(pair.H_w)
    lam_min, _ = extreme_eigs(H)
    inv_norm = 1.0 / lam_min
    Hinv_G = solve_psd(H, pair.G_w, name="H_w")
    lam = float(np.trace(solve_psd(H, Hinv_G.T, name="H_w"))) / inv_norm

    a1 = B1 * np.sqrt(inv_norm)
    a2 = B2 * inv_norm
    a3 = B3 * inv_norm ** 1.5

    lead = a1 * a1 / lam
    branches = (
        lead * _log_factor(W * W * lead, gamma) if lead > 0 else 0.0,
        a2 * a2,
        lam * a3 * a3,
    )
    return float(W * W * max(branches))


# 三个模型门槛的闭式量级

def linear_threshold(alpha, sigma: float, d: Optional[int] = None) -> float:
    """d(1 + (‖α‖²d + σ²d)/(‖α‖² + σ²d))²"""
    alpha = as_vector(alpha, "alpha")
    d = alpha.size if d is None else int(d)
    a2 = float(alpha @ alpha)
    s2 = sigma ** 2
    return d * (1.0 + (a2 * d + s2 * d) / (a2 + s2 * d)) ** 2


def logistic_threshold(d: int, r: float) -> float:
    return float(d) ** 4 * (1.0 + float(r) ** 6)


def phase_threshold(d: int, r: float) -> float:
    return float(d) ** 8 * (1.0 + float(r) ** 8)


__all__ = [
    "MIN_MONTE_CARLO",
    "fisher_closed_form",
    "fisher_monte_carlo",
    "fisher_matrix",
    "fisher_pair",
    "sphere_phase_eigs",
    "sphere_logistic_eigs",
    "transfer_trace",
    "transfer_norm",
    "linear_transfer_trace",
    "sphere_transfer_trace",
    "sphere_transfer_norm",
    "weighted_information",
    "AssumptionConstants",
    "assumption_constants",
    "sample_size_threshold",
    "weighted_sample_size_threshold",
    "linear_threshold",
    "logistic_threshold",
    "phase_threshold",
]
