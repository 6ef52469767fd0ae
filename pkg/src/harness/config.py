"""
Experiment Config - 实验配置

配置文件为扁平的 key = value 文本，# 开头为注释，列表用逗号分隔:

    model = linear
    d = 5
    source = gaussian(mean=0;scale=1)
    target = gaussian(mean=2,0,0,0,0;scale=1)
    beta_star = 1,0,0,0,0
    estimator = mle
    n_grid = 200,400,800,1600,3200,6400
    trials = 200
    seed = 42

分布语法:
    gaussian(mean=..;scale=..)     mean 为标量时按维度广播
    sphere(shift=..)               shift=perp:r 表示 r·β*⊥
    ball(radius=..)

ball_w 给出时 source / target 由球-壳构造生成，不能再显式给出；
restart_schedule (geometric | linear | constant | jittered) 选择相位恢复的起点扰动；
beta_star_outer 给出时数据由分段线性真值生成 (线性模型误设定)。
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ..core.base import ModelFamily
from ..core.errors import ConfigError, CovShiftError, UnsupportedPair
from ..core.restart import SCHEDULE_NAMES
from ..core.types import EstimatorKind, FitOptions, ModelKind
from ..covariates.distributions import (
    BallUniform,
    CovariateDistribution,
    GaussianCovariate,
    SphereShifted,
)
from ..covariates.shift import ShiftPair, ball_pair
from ..models import get_model
from ..models.truth import BallPiecewiseTruth, ResponseTruth, WellSpecifiedTruth

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("model", "d", "source", "target", "beta_star", "estimator", "n_grid", "trials")
OPTIONAL_KEYS = (
    "seed",
    "mc_eval_m",
    "noise_scale",
    "constraint_radius",
    "constraint_center",
    "ball_w",
    "beta_star_outer",
    "restarts",
    "restart_schedule",
    "max_iterations",
    "grad_tol",
    "ridge",
)

DEFAULT_MC_EVAL_M = 10_000
UINT64_MAX = (1 << 64) - 1

_DIST_PATTERN = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


# ==================== 配置对象 ====================

@dataclass
class ExperimentConfig:
    """一次 Monte Carlo 实验的全部输入"""
    model: ModelKind
    source: CovariateDistribution
    target: CovariateDistribution
    beta_star: np.ndarray
    estimator: EstimatorKind
    n_grid: List[int]
    trials: int
    master_seed: int = 0
    mc_eval_m: int = DEFAULT_MC_EVAL_M
    noise_scale: float = 1.0
    constraint_radius: Optional[float] = None
    constraint_center: Optional[np.ndarray] = None
    ball_w: Optional[float] = None
    beta_star_outer: Optional[np.ndarray] = None
    fit_options: FitOptions = field(default_factory=FitOptions)
    restart_schedule: str = "geometric"

    @property
    def d(self) -> int:
        return self.beta_star.size

    def model_family(self) -> ModelFamily:
        return get_model(self.model, self.noise_scale)

    def shift_pair(self) -> ShiftPair:
        return ShiftPair(self.source, self.target)

    def truth(self, model: ModelFamily) -> ResponseTruth:
        """数据生成过程；β* 总是目标域的最优参数"""
        if self.beta_star_outer is None:
            return WellSpecifiedTruth(model, self.beta_star)
        radius = self.target.radius if isinstance(self.target, BallUniform) else 1.0
        return BallPiecewiseTruth(self.beta_star, self.beta_star_outer, radius, self.noise_scale)

    @property
    def shift_radius(self) -> float:
        """目标球面的平移长度 r；其他分布为 0"""
        return self.target.shift_norm if isinstance(self.target, SphereShifted) else 0.0

    @property
    def description(self) -> str:
        return (
            f"{self.model.value} d={self.d} {self.estimator.value} "
            f"{self.source!r} -> {self.target!r}"
        )


# ==================== 文本解析 ====================

def parse_config_text(text: str) -> Dict[str, str]:
    """key = value 行 → 字典；重复键以最后一次为准"""
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        raw[key.strip().lower()] = value.strip()
    return raw


def _floats(value: str, key: str) -> List[float]:
    parts = [p for p in re.split(r"[,;\s]+", value.strip()) if p]
    if not parts:
        raise ConfigError(key, "empty value")
    try:
        return [float(p) for p in parts]
    except ValueError as e:
        raise ConfigError(key, f"not a number list: {value!r}") from e


def parse_vector(value: str, key: str, d: Optional[int] = None) -> np.ndarray:
    """逗号 / 分号分隔的向量；单个标量在给定维度时广播"""
    values = _floats(value, key)
    if d is not None and len(values) == 1:
        values = values * d
    if d is not None and len(values) != d:
        raise ConfigError(key, f"expected {d} entries, got {len(values)}")
    return np.array(values, dtype=float)


def _scalar(raw: Dict[str, str], key: str, kind: type, default=None):
    if key not in raw:
        if default is None:
            raise ConfigError(key, "missing required key")
        return default
    try:
        return kind(raw[key])
    except ValueError as e:
        raise ConfigError(key, f"not a valid {kind.__name__}: {raw[key]!r}") from e


def perpendicular_unit(beta: np.ndarray) -> np.ndarray:
    """与 β 正交的单位向量 (对 β 绝对值最小的坐标轴做 Gram-Schmidt)；β=0 时取 e₁"""
    d = beta.size
    norm = float(np.linalg.norm(beta))
    if norm == 0.0:
        e = np.zeros(d)
        e[0] = 1.0
        return e
    u = beta / norm
    e = np.zeros(d)
    e[int(np.argmin(np.abs(u)))] = 1.0
    v = e - (e @ u) * u
    return v / np.linalg.norm(v)


def _dist_params(body: str, key: str) -> Dict[str, str]:
    """以 ; 分隔的 name=value；不含 = 的片段接到前一个值后面 (向量)"""
    params: Dict[str, str] = {}
    last: Optional[str] = None
    for piece in body.split(";"):
        piece = piece.strip()
        if not piece:
            continue
        if "=" in piece:
            name, value = piece.split("=", 1)
            last = name.strip().lower()
            params[last] = value.strip()
        elif last is not None:
            params[last] += "," + piece
        else:
            raise ConfigError(key, f"bad distribution parameter {piece!r}")
    return params


def parse_distribution(value: str, key: str, d: int, beta_star: np.ndarray) -> CovariateDistribution:
    match = _DIST_PATTERN.match(value)
    if not match:
        raise ConfigError(key, f"expected name(param=value;...), got {value!r}")
    name, params = match.group(1).lower(), _dist_params(match.group(2), key)

    try:
        if name == "gaussian":
            mean = parse_vector(params.get("mean", "0"), key, d)
            scale = float(params.get("scale", "1"))
            return GaussianCovariate(mean, scale)
        if name == "sphere":
            shift_text = params.get("shift", "0")
            if shift_text.lower().startswith("perp:"):
                r = float(shift_text.split(":", 1)[1])
                shift = r * perpendicular_unit(beta_star)
            else:
                shift = parse_vector(shift_text, key, d)
            return SphereShifted(d, shift)
        if name == "ball":
            return BallUniform(d, float(params.get("radius", "1")))
    except CovShiftError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(key, str(e)) from e
    except ValueError as e:
        raise ConfigError(key, str(e)) from e

    raise ConfigError(key, f"unknown distribution {name!r}")


# ==================== 构建 ====================

def _enum(enum_type, raw: Dict[str, str], key: str):
    try:
        return enum_type(raw[key].strip().lower())
    except ValueError as e:
        choices = ", ".join(m.value for m in enum_type)
        raise ConfigError(key, f"expected one of {choices}") from e


def _n_grid(value: str) -> List[int]:
    values = _floats(value, "n_grid")
    if any(v != int(v) or v < 1 for v in values):
        raise ConfigError("n_grid", "sample sizes must be positive integers")
    grid = [int(v) for v in values]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("n_grid", "must be strictly increasing")
    return grid


def build_config(raw: Dict[str, str], seed: Optional[int] = None) -> ExperimentConfig:
    """
    字典 → ExperimentConfig

    Raises:
        ConfigError: 缺失 / 未知 / 非法键，key 属性给出出错的键
    """
    for key in raw:
        if key not in REQUIRED_KEYS and key not in OPTIONAL_KEYS:
            raise ConfigError(key, "unknown key")

    ball_w = _scalar(raw, "ball_w", float) if "ball_w" in raw else None
    for key in REQUIRED_KEYS:
        if key in ("source", "target") and ball_w is not None:
            continue
        if key not in raw:
            raise ConfigError(key, "missing required key")

    model = _enum(ModelKind, raw, "model")
    estimator = _enum(EstimatorKind, raw, "estimator")
    d = _scalar(raw, "d", int)
    if d < 1:
        raise ConfigError("d", "must be >= 1")
    beta_star = parse_vector(raw["beta_star"], "beta_star", d)

    if ball_w is not None:
        if ball_w < 1:
            raise ConfigError("ball_w", "must be >= 1")
        for key in ("source", "target"):
            if key in raw:
                raise ConfigError(key, "cannot be combined with ball_w (the construction fixes both domains)")
        pair = ball_pair(ball_w, d)
        source, target = pair.source, pair.target
    else:
        source = parse_distribution(raw["source"], "source", d, beta_star)
        target = parse_distribution(raw["target"], "target", d, beta_star)

    trials = _scalar(raw, "trials", int)
    if trials < 1:
        raise ConfigError("trials", "must be >= 1")

    master_seed = seed if seed is not None else _scalar(raw, "seed", int, default=0)
    if not 0 <= master_seed <= UINT64_MAX:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")

    mc_eval_m = _scalar(raw, "mc_eval_m", int, default=DEFAULT_MC_EVAL_M)
    if mc_eval_m < 1000:
        raise ConfigError("mc_eval_m", "must be >= 1000")
    noise_scale = _scalar(raw, "noise_scale", float, default=1.0)
    if noise_scale < 0:
        raise ConfigError("noise_scale", "must be >= 0")

    beta_star_outer = None
    if "beta_star_outer" in raw:
        if model != ModelKind.LINEAR:
            raise ConfigError("beta_star_outer", "piecewise truth is only defined for the linear model")
        beta_star_outer = parse_vector(raw["beta_star_outer"], "beta_star_outer", d)

    constraint_radius = None
    constraint_center = None
    if estimator == EstimatorKind.CONSTRAINED_MLE:
        constraint_radius = _scalar(raw, "constraint_radius", float)
        if constraint_radius <= 0:
            raise ConfigError("constraint_radius", "must be > 0")
        constraint_center = parse_vector(raw.get("constraint_center", "0"), "constraint_center", d)

    if estimator == EstimatorKind.PHASE_MLE and model != ModelKind.PHASE_RETRIEVAL:
        raise ConfigError("estimator", "phase_mle needs model = phase")
    if estimator == EstimatorKind.MWLE:
        if model == ModelKind.PHASE_RETRIEVAL:
            raise ConfigError("estimator", "mwle is not defined for phase retrieval")
        try:
            ShiftPair(source, target).ratio_bound()
        except UnsupportedPair as e:
            raise ConfigError("estimator", f"mwle needs a density ratio: {e}") from e

    defaults = FitOptions()
    try:
        fit_options = FitOptions(
            max_iterations=_scalar(raw, "max_iterations", int, default=defaults.max_iterations),
            grad_tol=_scalar(raw, "grad_tol", float, default=defaults.grad_tol),
            ridge=_scalar(raw, "ridge", float, default=defaults.ridge),
            restarts=_scalar(raw, "restarts", int, default=defaults.restarts),
        )
    except CovShiftError as e:
        raise ConfigError("fit options", str(e)) from e

    restart_schedule = raw.get("restart_schedule", "geometric").strip().lower()
    if restart_schedule not in SCHEDULE_NAMES:
        raise ConfigError("restart_schedule", f"expected one of {', '.join(SCHEDULE_NAMES)}")

    return ExperimentConfig(
        model=model,
        source=source,
        target=target,
        beta_star=beta_star,
        estimator=estimator,
        n_grid=_n_grid(raw["n_grid"]),
        trials=trials,
        master_seed=master_seed,
        mc_eval_m=mc_eval_m,
        noise_scale=noise_scale,
        constraint_radius=constraint_radius,
        constraint_center=constraint_center,
        ball_w=ball_w,
        beta_star_outer=beta_star_outer,
        fit_options=fit_options,
        restart_schedule=restart_schedule,
    )


def load_config(path: Union[str, Path], seed: Optional[int] = None) -> ExperimentConfig:
    """读取并解析配置文件；seed 覆盖文件中的 seed"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from e
    cfg = build_config(parse_config_text(text), seed=seed)
    logger.debug(f"loaded config {path}: {cfg.description}")
    return cfg


__all__ = [
    "ExperimentConfig",
    "REQUIRED_KEYS",
    "OPTIONAL_KEYS",
    "parse_config_text",
    "parse_vector",
    "parse_distribution",
    "perpendicular_unit",
    "build_config",
    "load_config",
]
