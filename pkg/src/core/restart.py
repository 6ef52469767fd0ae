"""
Restart Policy - 多起点重启与重新采样

提供两类重启:
- 非凸拟合的多起点扰动 (相位恢复: 在谱初始化附近按扰动尺度重启)
- 概率为零的采样退化 (高斯方向为零向量时重新采样)

使用方式:
    from src.core.restart import RestartConfig, geometric_schedule, redraw

    config = RestartConfig(
        max_attempts=5,
        perturbation_schedule=geometric_schedule(base=0.5, ratio=0.5),
    )
    for attempt in range(config.max_attempts):
        scale = config.perturbation_schedule(attempt)

    @redraw(max_attempts=10)
    def draw_direction(rng):
        ...
"""

import logging
from dataclasses import dataclass, field
from functools import wraps
from typing import Callable, List, Optional, Type, TypeVar

import numpy as np

from .errors import DegenerateGaussianDraw, InvalidArgument

logger = logging.getLogger(__name__)

T = TypeVar('T')

Schedule = Callable[[int], float]


# ==================== 扰动尺度 ====================
# 第 0 次尝试是未扰动的初始点，schedule(0) 只在显式需要时使用

def constant_schedule(scale: float = 0.5) -> Schedule:
    """固定扰动尺度"""
    def schedule(attempt: int) -> float:
        return scale
    return schedule


def linear_schedule(base: float = 0.25, increment: float = 0.25, max_scale: float = 2.0) -> Schedule:
    """线性增长的扰动尺度"""
    def schedule(attempt: int) -> float:
        return min(base + increment * attempt, max_scale)
    return schedule


def geometric_schedule(base: float = 0.5, ratio: float = 0.5, min_scale: float = 1e-3) -> Schedule:
    """几何衰减的扰动尺度 (从粗到细)"""
    def schedule(attempt: int) -> float:
        return max(base * (ratio ** attempt), min_scale)
    return schedule


def jittered_schedule(
    base_schedule: Schedule,
    rng: np.random.Generator,
    jitter_factor: float = 0.1,
) -> Schedule:
    """
    带抖动的扰动尺度

    抖动来自调用方传入的 rng，保证整个拟合可复现
    """
    def schedule(attempt: int) -> float:
        scale = base_schedule(attempt)
        jitter = scale * jitter_factor * rng.uniform(-1, 1)
        return max(0.0, scale + jitter)
    return schedule


# ==================== 重启配置 ====================

@dataclass
class RestartConfig:
    """重启配置"""
    # 总尝试次数 (含未扰动的第一次)
    max_attempts: int = 5

    # attempt → 相对扰动尺度
    perturbation_schedule: Schedule = field(
        default_factory=lambda: geometric_schedule(base=0.5, ratio=0.5)
    )

    # 可重试的异常类型
    retryable_exceptions: List[Type[Exception]] = field(
        default_factory=lambda: [DegenerateGaussianDraw]
    )

    # 不可重试的异常类型
    non_retryable_exceptions: List[Type[Exception]] = field(
        default_factory=list
    )

    # 每次重启前回调 (attempt, scale)
    on_restart: Optional[Callable[[int, float], None]] = None

    # 是否在日志中记录重启
    log_restarts: bool = True

    def should_retry(self, exception: Exception) -> bool:
        """判断异常是否应触发重启"""
        for exc_type in self.non_retryable_exceptions:
            if isinstance(exception, exc_type):
                return False

        for exc_type in self.retryable_exceptions:
            if isinstance(exception, exc_type):
                return True

        return False

    def scales(self) -> List[float]:
        """每次尝试的扰动尺度；第 0 次为 0 (原始初始点)"""
        return [0.0] + [self.perturbation_schedule(a) for a in range(self.max_attempts - 1)]

    def notify(self, attempt: int, scale: float) -> None:
        if self.on_restart:
            self.on_restart(attempt, scale)
        if self.log_restarts:
            logger.debug(f"重启 {attempt}/{self.max_attempts - 1}, 扰动尺度 {scale:.3g}")


# ==================== 重新采样装饰器 ====================

def redraw(
    max_attempts: int = 10,
    retryable_exceptions: Optional[List[Type[Exception]]] = None,
    config: Optional[RestartConfig] = None,
):
    """
    重新采样装饰器

    被装饰的采样函数抛出异常时按 RestartConfig.should_retry 判断是否重新调用；
    随机源由调用方的 rng 推进，所以重试仍然是确定性的。
    config 给出时忽略 max_attempts / retryable_exceptions。

    使用方式:
        @redraw(max_attempts=10)
        def unit_direction(d, rng):
            ...
    """
    if config is None:
        config = RestartConfig(
            max_attempts=max_attempts,
            retryable_exceptions=list(retryable_exceptions or [DegenerateGaussianDraw]),
            log_restarts=False,
        )

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> T:
            for attempt in range(config.max_attempts):
                try:
                    return func(*args, **kwargs)
                except Exception as e:
                    if not config.should_retry(e) or attempt >= config.max_attempts - 1:
                        raise
                    logger.debug(f"重新采样 {attempt + 1}/{config.max_attempts}: {e}")
            raise InvalidArgument("redraw needs max_attempts >= 1")

        return wrapper
    return decorator


# ==================== 预定义配置 ====================

# 单起点：只用谱初始化
SINGLE_START = RestartConfig(
    max_attempts=1,
    perturbation_schedule=constant_schedule(0.0),
)

SCHEDULE_NAMES = ("geometric", "linear", "constant", "jittered")


def schedule_by_name(name: str, rng: Optional[np.random.Generator] = None) -> Schedule:
    """
    配置键 restart_schedule → 扰动尺度

    geometric: 0.5 起每次减半 (默认)
    linear:    0.5 起每次加 0.25，上限 2
    constant:  固定 0.5
    jittered:  geometric 加 ±10% 抖动，需要 rng
    """
    if name == "geometric":
        return geometric_schedule(base=0.5, ratio=0.5)
    if name == "linear":
        return linear_schedule(base=0.5, increment=0.25, max_scale=2.0)
    if name == "constant":
        return constant_schedule(0.5)
    if name == "jittered":
        if rng is None:
            raise InvalidArgument("jittered schedule needs an rng")
        return jittered_schedule(geometric_schedule(base=0.5, ratio=0.5), rng)
    raise InvalidArgument(f"unknown restart schedule {name!r}; expected one of {SCHEDULE_NAMES}")


def restart_config_for(
    attempts: int,
    schedule: str = "geometric",
    rng: Optional[np.random.Generator] = None,
) -> RestartConfig:
    """按 FitOptions.restarts 与调度名构造配置"""
    if attempts <= 1:
        return SINGLE_START
    return RestartConfig(
        max_attempts=attempts,
        perturbation_schedule=schedule_by_name(schedule, rng),
    )


__all__ = [
    "RestartConfig",
    "constant_schedule",
    "linear_schedule",
    "geometric_schedule",
    "jittered_schedule",
    "redraw",
    "restart_config_for",
    "schedule_by_name",
    "SCHEDULE_NAMES",
    "SINGLE_START",
]
