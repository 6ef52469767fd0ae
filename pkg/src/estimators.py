"""
Estimators - MLE / MWLE / 约束 MLE / 相位恢复 MLE

求解器:
1. 线性回归: (加权) 正规方程 + Cholesky，必要时加一次岭
2. 凸模型 (逻辑回归): 阻尼牛顿，回溯减半直到损失下降
3. 约束 MLE: 先解无约束问题，约束起作用时从投影点做投影梯度
4. 相位恢复: 谱初始化 + 多起点梯度下降，末端用牛顿步精修

使用方式:
    from src.estimators import fit_mle, fit_mwle, fit_phase_retrieval
    from src.models import get_model

    est = fit_mle(get_model("logistic"), dataset)
    if not est.converged:
        ...
"""

import logging
from dataclasses import replace
from typing import Optional

import numpy as np

from .core.base import ModelFamily
from .core.errors import (
    DegenerateWeights,
    DimensionMismatch,
    InvalidArgument,
    NotConverged,
    SingularDesign,
    SpectralFailure,
)
from .core.linalg import is_invertible, solve_psd
from .core.restart import RestartConfig, restart_config_for
from .core.types import (
    DataLike,
    Dataset,
    Estimate,
    FitOptions,
    ModelKind,
    StepRule,
    as_dataset,
    as_vector,
)
from .models.phase import PhaseRetrieval
from .utils.debug import FitTrace

logger = logging.getLogger(__name__)

# 回溯减半的最大次数
MAX_HALVINGS = 60
# 损失差落在舍入误差内时，改用梯度范数判断是否接受
LOSS_ROUNDOFF = 1e-13
# 相位恢复梯度下降阶段的停止阈值，之后交给牛顿精修
PHASE_GD_TOL = 1e-6
# 谱初始化幂迭代
POWER_MAX_ITER = 10000
POWER_TOL = 1e-9


# ==================== 公共工具 ====================

def _prepare(model: ModelFamily, data: DataLike) -> Dataset:
    ds = as_dataset(data)
    model.validate_responses(ds.y)
    return ds


def _finish(est: Estimate, opts: FitOptions, solver: str) -> Estimate:
    if est.trace is not None:
        est.trace.finish(est.converged)
    if not est.converged:
        logger.warning(
            f"{solver} 未收敛: {est.iterations} 次迭代, ‖∇‖={est.final_grad_norm:.3g}"
        )
        if opts.strict:
            raise NotConverged(f"{solver} hit the iteration cap", estimate=est)
    return est


def _new_trace(opts: FitOptions, solver: str) -> Optional[FitTrace]:
    return FitTrace(solver=solver) if opts.trace else None


def _compare_loss(loss: float, cand_loss: float) -> int:
    """
    1: 损失严格下降；0: 差值在舍入误差内 (需再看梯度范数)；-1: 拒绝
    """
    if not np.isfinite(cand_loss):
        return -1
    slack = LOSS_ROUNDOFF * max(1.0, abs(loss))
    if cand_loss < loss - slack:
        return 1
    if cand_loss <= loss + slack:
        return 0
    return -1


def _descend(
    model: ModelFamily,
    data: Dataset,
    weights: Optional[np.ndarray],
    beta0: np.ndarray,
    opts: FitOptions,
    newton: bool,
    max_iterations: int,
    tol: float,
    trace: Optional[FitTrace] = None,
    attempt: int = 0,
) -> Estimate:
    """
    阻尼牛顿 / 梯度下降的公共循环

    newton=False 时使用梯度方向；初始步长为 opts.step_size
    (GRADIENT_FIXED) 或 1/λmax(Hessian)
    """
    d = data.d
    beta = beta0.copy()
    loss = model.empirical_loss(data, beta, weights)
    g = model.empirical_gradient(data, beta, weights)
    gnorm = float(np.linalg.norm(g))
    ridge_used = False
    base_step = _gradient_step(model, data, weights, beta, opts) if not newton else 1.0

    if trace is not None:
        trace.record(0, loss, gnorm, 0.0, attempt)

    it = 0
    while gnorm > tol and it < max_iterations:
        it += 1

        if newton:
            H = model.empirical_hessian(data, beta, weights)
            try:
                direction = -solve_psd(H, g, error=SingularDesign, name="Hessian")
            except SingularDesign:
                ridge_used = True
                try:
                    direction = -solve_psd(
                        H + opts.ridge * np.eye(d), g, error=SingularDesign, name="Hessian"
                    )
                except SingularDesign:
                    # 非凸区域: 退回梯度方向
                    direction = -g * _gradient_step(model, data, weights, beta, opts)
            step = 1.0
        else:
            direction = -g
            step = base_step

        accepted = False
        for _ in range(MAX_HALVINGS):
            cand = beta + step * direction
            cand_loss = model.empirical_loss(data, cand, weights)
            cand_g = None
            verdict = _compare_loss(loss, cand_loss)
            if verdict == 0:
                cand_g = model.empirical_gradient(data, cand, weights)
                verdict = 1 if np.linalg.norm(cand_g) < gnorm else -1
            if verdict > 0:
                accepted = True
                break
            step *= 0.5

        if not accepted:
            logger.debug(f"回溯停滞: 第 {it} 次迭代, ‖∇‖={gnorm:.3g}")
            if trace is not None:
                trace.note(f"backtracking stalled at iteration {it} (attempt {attempt})")
            break

        beta, loss = cand, cand_loss
        g = cand_g if cand_g is not None else model.empirical_gradient(data, beta, weights)
        gnorm = float(np.linalg.norm(g))
        if not newton:
            # 成功后允许步长回升
            base_step = 2.0 * step
            if opts.step_rule == StepRule.GRADIENT_FIXED:
                base_step = min(base_step, float(opts.step_size))

        if trace is not None:
            trace.record(it, loss, gnorm, step, attempt)

    if ridge_used:
        logger.debug("Hessian 奇异，已加岭")
        if trace is not None:
            trace.note(f"ridge {opts.ridge:g} added to a singular Hessian (attempt {attempt})")

    return Estimate(
        beta_hat=beta,
        converged=gnorm <= tol,
        iterations=it,
        final_grad_norm=gnorm,
        final_loss=loss,
        ridge_used=ridge_used,
        trace=trace,
    )


def _gradient_step(
    model: ModelFamily,
    data: Dataset,
    weights: Optional[np.ndarray],
    beta: np.ndarray,
    opts: FitOptions,
) -> float:
    """一阶方法的初始步长"""
    if opts.step_rule == StepRule.GRADIENT_FIXED:
        return float(opts.step_size)
    H = model.empirical_hessian(data, beta, weights)
    lam = float(np.max(np.abs(np.linalg.eigvalsh(H))))
    if not lam > 0:
        sq = np.sum(data.X ** 2, axis=1)
        lam = float(np.mean(sq if weights is None else weights * sq)) or 1.0
    return 1.0 / lam


# ==================== 线性回归闭式解 ====================

def _fit_linear(data: Dataset, weights: np.ndarray, opts: FitOptions, model: ModelFamily) -> Estimate:
    X, y = data.X, data.y
    d = data.d
    gram = X.T @ (weights[:, None] * X) / data.n
    rhs = X.T @ (weights * y) / data.n

    ridge_used = False
    if not is_invertible(gram):
        gram = gram + opts.ridge * np.eye(d)
        ridge_used = True
        if not is_invertible(gram):
            raise SingularDesign("X^T W X is rank deficient even after ridge")
        logger.debug("设计矩阵病态，已加岭")

    beta = solve_psd(gram, rhs, error=SingularDesign, name="X^T W X")
    g = model.empirical_gradient(data, beta, weights)
    gnorm = float(np.linalg.norm(g))
    iterations = 1
    if gnorm > opts.grad_tol:
        # 一步迭代精化
        beta = beta - solve_psd(gram, g, error=SingularDesign, name="X^T W X")
        g = model.empirical_gradient(data, beta, weights)
        gnorm = float(np.linalg.norm(g))
        iterations = 2

    trace = _new_trace(opts, "normal_equations")
    loss = model.empirical_loss(data, beta, weights)
    if trace is not None:
        trace.record(iterations, loss, gnorm, 1.0)
        if ridge_used:
            trace.note(f"ridge {opts.ridge:g} added to X^T W X")

    return Estimate(
        beta_hat=beta,
        converged=gnorm <= opts.grad_tol,
        iterations=iterations,
        final_grad_norm=gnorm,
        final_loss=loss,
        ridge_used=ridge_used,
        trace=trace,
    )


def _fit_weighted(
    model: ModelFamily,
    data: Dataset,
    weights: np.ndarray,
    opts: FitOptions,
) -> Estimate:
    if model.kind == ModelKind.LINEAR:
        return _finish(_fit_linear(data, weights, opts, model), opts, "normal_equations")

    newton = opts.step_rule == StepRule.NEWTON_DAMPED
    solver = "newton" if newton else "gradient"
    est = _descend(
        model,
        data,
        weights,
        np.zeros(data.d),
        opts,
        newton=newton,
        max_iterations=opts.max_iterations if newton else opts.max_gradient_iterations,
        tol=opts.grad_tol,
        trace=_new_trace(opts, solver),
    )
    logger.debug(f"{solver}: {est.iterations} 次迭代, ‖∇‖={est.final_grad_norm:.3g}")
    return _finish(est, opts, solver)


# ==================== 公开接口 ====================

def fit_mle(model: ModelFamily, data: DataLike, opts: Optional[FitOptions] = None, rng=None) -> Estimate:
    """
    极大似然估计: argmin (1/n) Σ ℓ(x_i, y_i, β)

    相位恢复模型转交 fit_phase_retrieval (rng 用于多起点扰动)
    """
    opts = opts or FitOptions()
    ds = _prepare(model, data)
    if model.kind == ModelKind.PHASE_RETRIEVAL:
        return fit_phase_retrieval(ds, opts, rng=rng, model=model)
    return _fit_weighted(model, ds, np.ones(ds.n), opts)


def fit_mwle(
    model: ModelFamily,
    data: DataLike,
    weights,
    opts: Optional[FitOptions] = None,
) -> Estimate:
    """
    极大加权似然估计: argmin (1/n) Σ w(x_i) ℓ(x_i, y_i, β)

    Raises:
        DegenerateWeights: 正权重样本少于 d 个
    """
    opts = opts or FitOptions()
    ds = _prepare(model, data)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != ds.n:
        raise DimensionMismatch(ds.n, w.size, "weights")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidArgument("weights must be finite and nonnegative")
    active = int(np.count_nonzero(w > 0))
    if active < ds.d:
        raise DegenerateWeights(f"only {active} observations with positive weight, need {ds.d}")
    if model.kind == ModelKind.PHASE_RETRIEVAL:
        raise InvalidArgument("weighted fitting is not defined for phase retrieval")
    return _fit_weighted(model, ds, w, opts)


def _project(beta: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    offset = beta - center
    norm = float(np.linalg.norm(offset))
    if norm <= radius:
        return beta
    return center + offset * (radius / norm)


def fit_constrained_mle(
    model: ModelFamily,
    data: DataLike,
    center,
    radius: float,
    opts: Optional[FitOptions] = None,
) -> Estimate:
    """
    约束 MLE: 在闭球 B_center(radius) 上最小化经验损失

    final_grad_norm 为投影梯度映射的范数 (内点处等于梯度范数)
    """
    opts = opts or FitOptions()
    if not radius > 0:
        raise InvalidArgument("constraint radius must be > 0")
    ds = _prepare(model, data)
    center = as_vector(center, "center", ds.d)

    start = center.copy()
    if model.kind != ModelKind.PHASE_RETRIEVAL:
        try:
            uncon = _fit_weighted(model, ds, np.ones(ds.n), replace(opts, strict=False))
            if uncon.converged and np.linalg.norm(uncon.beta_hat - center) <= radius:
                logger.debug("约束未起作用，返回无约束解")
                return uncon
            if np.all(np.isfinite(uncon.beta_hat)):
                start = _project(uncon.beta_hat, center, radius)
        except SingularDesign:
            logger.debug("无约束解奇异，从球心开始投影梯度")

    trace = _new_trace(opts, "projected_gradient")
    beta = start
    loss = model.empirical_loss(ds, beta)
    step = _gradient_step(model, ds, None, beta, opts)
    it = 0
    mapping_norm = float("inf")

    while it < opts.max_gradient_iterations:
        g = model.empirical_gradient(ds, beta)
        mapping = (beta - _project(beta - step * g, center, radius)) / step
        mapping_norm = float(np.linalg.norm(mapping))
        if trace is not None:
            trace.record(it, loss, mapping_norm, step)
        if mapping_norm <= opts.grad_tol:
            break

        it += 1
        accepted = False
        for _ in range(MAX_HALVINGS):
            cand = _project(beta - step * g, center, radius)
            diff = cand - beta
            cand_loss = model.empirical_loss(ds, cand)
            # 充分下降 (二次上界) 条件
            bound = loss + g @ diff + (diff @ diff) / (2.0 * step)
            if cand_loss <= bound + LOSS_ROUNDOFF * max(1.0, abs(loss)):
                accepted = True
                break
            step *= 0.5

        if not accepted:
            logger.debug(f"投影梯度回溯停滞: 第 {it} 次迭代")
            if trace is not None:
                trace.note(f"projected gradient stalled at iteration {it}")
            break
        if np.array_equal(cand, beta):
            break
        beta, loss = cand, cand_loss

    est = Estimate(
        beta_hat=beta,
        converged=mapping_norm <= opts.grad_tol,
        iterations=it,
        final_grad_norm=mapping_norm,
        final_loss=loss,
        trace=trace,
    )
    return _finish(est, opts, "projected_gradient")


# ==================== 相位恢复 ====================

def spectral_init(data: Dataset, rng: np.random.Generator) -> np.ndarray:
    """
    谱初始化

    (1/(2n)) Σ y_i x_i x_iᵀ 的主特征向量，缩放到 √(max(mean y, 0))；
    用 Gershgorin 下界平移保证幂迭代收敛到最大代数特征值

    Raises:
        SpectralFailure: 幂迭代在上限内没有收敛
    """
    X, y = data.X, data.y
    M = X.T @ (y[:, None] * X) / (2.0 * data.n)
    M = 0.5 * (M + M.T)
    off = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
    shift = max(0.0, -float(np.min(np.diag(M) - off)))

    v = rng.standard_normal(data.d)
    v /= np.linalg.norm(v)
    for _ in range(POWER_MAX_ITER):
        w = M @ v + shift * v
        norm = float(np.linalg.norm(w))
        if norm == 0.0 or not np.isfinite(norm):
            raise SpectralFailure("power iteration collapsed to zero")
        w /= norm
        if np.linalg.norm(w - v) <= POWER_TOL:
            v = w
            break
        v = w
    else:
        raise SpectralFailure(f"power iteration did not settle in {POWER_MAX_ITER} steps")

    scale = float(np.sqrt(max(float(np.mean(y)), 0.0)))
    return scale * v


def fit_phase_retrieval(
    data: DataLike,
    opts: Optional[FitOptions] = None,
    rng: Optional[np.random.Generator] = None,
    restart_config: Optional[RestartConfig] = None,
    model: Optional[ModelFamily] = None,
) -> Estimate:
    """
    相位恢复 MLE

    谱初始化后做梯度下降；opts.restarts 个起点 (第一个是未扰动的谱初始化，
    其余按 RestartConfig 的尺度扰动) 中返回经验损失最低者。
    梯度下降到 PHASE_GD_TOL 后用阻尼牛顿精修到 grad_tol。
    """
    opts = opts or FitOptions()
    model = model or PhaseRetrieval()
    ds = _prepare(model, data)
    if ds.n < ds.d:
        raise InvalidArgument(f"phase retrieval needs n >= d, got n={ds.n}, d={ds.d}")
    rng = rng if rng is not None else np.random.default_rng(0)
    config = restart_config or restart_config_for(opts.restarts)

    init = spectral_init(ds, rng)
    init_norm = max(float(np.linalg.norm(init)), 1e-3)
    trace = _new_trace(opts, "phase_multistart")

    best: Optional[Estimate] = None
    total_iterations = 0
    for attempt, scale in enumerate(config.scales()):
        start = init
        if attempt > 0:
            config.notify(attempt, scale)
            if trace is not None:
                trace.note(f"restart {attempt} with perturbation scale {scale:.3g}")
            start = init + scale * init_norm * rng.standard_normal(ds.d) / np.sqrt(ds.d)

        coarse = _descend(
            model, ds, None, start, opts,
            newton=False,
            max_iterations=opts.max_gradient_iterations,
            tol=max(opts.grad_tol, PHASE_GD_TOL),
            trace=trace,
            attempt=attempt,
        )
        est = _descend(
            model, ds, None, coarse.beta_hat, opts,
            newton=True,
            max_iterations=opts.max_iterations,
            tol=opts.grad_tol,
            trace=trace,
            attempt=attempt,
        )
        total_iterations += coarse.iterations + est.iterations
        logger.debug(
            f"起点 {attempt}: 损失 {est.final_loss:.6g}, ‖∇‖={est.final_grad_norm:.3g}"
        )
        if best is None or est.final_loss < best.final_loss:
            best = est

    result = Estimate(
        beta_hat=best.beta_hat,
        converged=best.converged,
        iterations=total_iterations,
        final_grad_norm=best.final_grad_norm,
        final_loss=best.final_loss,
        ridge_used=best.ridge_used,
        restarts_used=config.max_attempts - 1,
        trace=trace,
    )
    return _finish(result, opts, "phase_multistart")


def aligned_distance(beta_hat, beta_star) -> float:
    """min(‖β̂ − β*‖, ‖β̂ + β*‖)"""
    beta_hat = as_vector(beta_hat, "beta_hat")
    beta_star = as_vector(beta_star, "beta_star")
    if beta_hat.size != beta_star.size:
        raise DimensionMismatch(beta_star.size, beta_hat.size, "beta_hat")
    return float(min(np.linalg.norm(beta_hat - beta_star), np.linalg.norm(beta_hat + beta_star)))


__all__ = [
    "fit_mle",
    "fit_mwle",
    "fit_constrained_mle",
    "fit_phase_retrieval",
    "spectral_init",
    "aligned_distance",
]
