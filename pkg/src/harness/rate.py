"""
Rate Analysis - 速率拟合与汇总

- rate_fit: log(平均超额风险) 对 log(n) 的最小二乘，以及 n·R̄/Tr 的归一化水平
- summarize: 每个 n 的均值 / 标准误 / 分位数
- paired_difference: 同种子下两个估计器的配对风险差
- lower_bound_check: 归一化经验风险与 van Trees 下界的比较
- config_radii: 配置对应模型常数下的局部化半径 (R0, R1)
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats

from ..bounds import RadiiInputs, localization_radii, van_trees_bound
from ..core.errors import InsufficientGrid, InvalidArgument
from ..core.types import FisherPair, RateReport, TrialResult
from ..fisher import assumption_constants, transfer_trace
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 4
MIN_TRIALS_PER_N = 50


def _finite_risks(rows: Sequence[TrialResult]) -> Dict[int, np.ndarray]:
    grouped: Dict[int, List[float]] = defaultdict(list)
    for row in rows:
        if np.isfinite(row.excess_risk):
            grouped[row.n].append(row.excess_risk)
    return {n: np.asarray(v) for n, v in sorted(grouped.items())}


def rate_fit(rows: Sequence[TrialResult], trace: float = 1.0) -> RateReport:
    """
    Raises:
        InsufficientGrid: 不足 4 个 n，或某个 n 的有效试验少于 50 个
    """
    if not trace > 0:
        raise InvalidArgument(f"trace must be > 0, got {trace}")
    risks = _finite_risks(rows)
    if len(risks) < MIN_GRID_POINTS:
        raise InsufficientGrid(f"need >= {MIN_GRID_POINTS} distinct n values, got {len(risks)}")
    short = {n: v.size for n, v in risks.items() if v.size < MIN_TRIALS_PER_N}
    if short:
        raise InsufficientGrid(f"need >= {MIN_TRIALS_PER_N} finite trials per n, got {short}")

    ns = np.array(list(risks), dtype=float)
    means = np.array([v.mean() for v in risks.values()])
    if np.any(means <= 0):
        raise InsufficientGrid("mean excess risk must be positive at every n for a log-log fit")

    fit = stats.linregress(np.log(ns), np.log(means))
    report = RateReport(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
        normalized_levels={int(n): float(n * m / trace) for n, m in zip(ns, means)},
        mean_risk={int(n): float(m) for n, m in zip(ns, means)},
        trials_per_n={n: int(v.size) for n, v in risks.items()},
    )
    logger.debug(f"rate fit: slope={report.slope:.4f} r²={report.r_squared:.4f}")
    return report


@dataclass(frozen=True)
class RiskSummary:
    """单个 n 的超额风险汇总"""
    n: int
    count: int
    failed: int
    mean: float
    standard_error: float
    q50: float
    q90: float
    q99: float


def summarize(rows: Sequence[TrialResult]) -> List[RiskSummary]:
    """按 n 汇总；失败行计入 failed，不参与统计"""
    failed: Dict[int, int] = defaultdict(int)
    for row in rows:
        if not np.isfinite(row.excess_risk):
            failed[row.n] += 1

    risks = _finite_risks(rows)
    summaries = []
    for n in sorted(set(risks) | set(failed)):
        v = risks.get(n, np.empty(0))
        if v.size:
            q50, q90, q99 = np.quantile(v, [0.5, 0.9, 0.99])
            se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
            mean = float(v.mean())
        else:
            q50 = q90 = q99 = mean = se = float("nan")
        summaries.append(RiskSummary(n, int(v.size), failed[n], mean, se, float(q50), float(q90), float(q99)))
    return summaries


def paired_difference(
    rows_a: Sequence[TrialResult],
    rows_b: Sequence[TrialResult],
    n: int,
) -> Tuple[float, float]:
    """
    同一 (n, trial) 种子下 R_a − R_b 的均值与标准误

    两次实验使用同一 master_seed 时数据相同，只有估计器不同
    """
    a = {r.trial_index: r.excess_risk for r in rows_a if r.n == n}
    b = {r.trial_index: r.excess_risk for r in rows_b if r.n == n}
    diffs = np.array([a[t] - b[t] for t in sorted(a.keys() & b.keys())])
    diffs = diffs[np.isfinite(diffs)]
    if diffs.size < 2:
        raise InsufficientGrid(f"need >= 2 paired trials at n={n}, got {diffs.size}")
    return float(diffs.mean()), float(np.std(diffs, ddof=1) / np.sqrt(diffs.size))


@dataclass(frozen=True)
class LowerBoundRow:
    n: int
    normalized_risk: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.normalized_risk >= self.bound


def config_radii(
    cfg: ExperimentConfig,
    pair: FisherPair,
    prior_radius: float = 1.0,
) -> Tuple[float, float]:
    """
    (R0, R1)：I_S0 / I_T0 取 β* 处的 pair，L_S / L_T / B3 取模型常数表

    prior_radius 为先验立方体半宽 B，R0 ≤ B
    """
    consts = assumption_constants(cfg.model, cfg.d, cfg.shift_radius)
    return localization_radii(
        RadiiInputs(pair.I_S, pair.I_T, consts.L_S, consts.L_T, consts.B3, prior_radius)
    )


def lower_bound_check(
    rows: Sequence[TrialResult],
    pair: FisherPair,
    R1: float,
) -> List[LowerBoundRow]:
    """每个 n: Tr(I_T I_S⁻¹)⁻¹·mean(R) 与 van_trees_bound(n) 的比较"""
    trace = transfer_trace(pair)
    return [
        LowerBoundRow(n, float(v.mean() / trace), van_trees_bound(pair, R1, pair.dim, n))
        for n, v in _finite_risks(rows).items()
        if v.size
    ]


__all__ = [
    "MIN_GRID_POINTS",
    "MIN_TRIALS_PER_N",
    "rate_fit",
    "config_radii",
    "RiskSummary",
    "summarize",
    "paired_difference",
    "LowerBoundRow",
    "lower_bound_check",
]
