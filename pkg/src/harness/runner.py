"""
Experiment Runner - 带种子的 Monte Carlo 实验

每个 (n, trial) 是独立任务:
1. seed = trial_seed(master_seed, n, trial)，全部随机性来自该种子
2. 从源域抽 n 个样本，按配置的估计器拟合
3. 计算目标域超额风险 (线性回归有闭式时用闭式，否则条件 Monte Carlo)
4. 产出一行 TrialResult；估计器失败时该行标记 converged=false、风险为 NaN

结果按 (n, trial) 排序，CSV 与线程数无关、逐字节可复现。

使用方式:
    from src.harness.config import load_config
    from src.harness.runner import run_experiment, write_csv

    rows = run_experiment(load_config("configs/linear.cfg"))
    write_csv(rows, "results.csv")
"""

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Iterable, List, Optional, TextIO, Union

import numpy as np
from tqdm import tqdm

from ..core.errors import CovShiftError, InvalidArgument
from ..core.restart import restart_config_for
from ..core.types import Dataset, EstimatorKind, Estimate, ModelKind, TrialResult
from ..estimators import (
    aligned_distance,
    fit_constrained_mle,
    fit_mle,
    fit_mwle,
    fit_phase_retrieval,
)
from ..risk import excess_risk
from ..utils.logger import get_logger, get_trial_logger
from ..utils.seeding import trial_rng, trial_seed
from .config import ExperimentConfig

logger = get_logger(__name__)
trial_logger = get_trial_logger(__name__)

CSV_HEADER = (
    "model", "d", "n", "trial", "estimator", "excess_risk", "excess_risk_se",
    "param_dist", "aligned_dist", "converged", "seed",
)

THREADS_ENV = "COVSHIFT_THREADS"


def worker_count(tasks: int) -> int:
    """COVSHIFT_THREADS 限制线程数；只影响速度"""
    limit = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            limit = max(1, int(env))
        except ValueError:
            logger.warning(f"ignoring non-integer {THREADS_ENV}={env!r}")
    return max(1, min(limit, tasks))


# ==================== 单次试验 ====================

def _fit(
    cfg: ExperimentConfig,
    model,
    data: Dataset,
    rng: np.random.Generator,
    trace: bool = False,
) -> Estimate:
    opts = replace(cfg.fit_options, trace=True) if trace else cfg.fit_options
    if cfg.model == ModelKind.PHASE_RETRIEVAL and cfg.estimator in (EstimatorKind.MLE, EstimatorKind.PHASE_MLE):
        restarts = restart_config_for(opts.restarts, cfg.restart_schedule, rng)
        return fit_phase_retrieval(data, opts, rng=rng, restart_config=restarts, model=model)
    if cfg.estimator == EstimatorKind.MLE:
        return fit_mle(model, data, opts, rng=rng)
    if cfg.estimator == EstimatorKind.MWLE:
        weights = cfg.shift_pair().density_ratios(data.X)
        return fit_mwle(model, data, weights, opts)
    if cfg.estimator == EstimatorKind.CONSTRAINED_MLE:
        return fit_constrained_mle(model, data, cfg.constraint_center, cfg.constraint_radius, opts)
    raise InvalidArgument(f"unknown estimator {cfg.estimator}")


def trace_path(trace_dir: Union[str, Path], n: int, trial_index: int) -> Path:
    return Path(trace_dir) / f"n{n}_trial{trial_index}.json"


def run_trial(
    cfg: ExperimentConfig,
    n: int,
    trial_index: int,
    trace_dir: Optional[Union[str, Path]] = None,
) -> TrialResult:
    """
    一个 (n, trial) 任务；估计器错误在这里被捕获并标记

    trace_dir 给出时记录拟合轨迹，不收敛的试验写到 trace_dir/n{n}_trial{t}.json
    """
    seed = trial_seed(cfg.master_seed, n, trial_index)
    rng = trial_rng(seed)
    model = cfg.model_family()

    X = cfg.source.sample_batch(n, rng)
    y = cfg.truth(model).sample(X, rng)

    nan = float("nan")
    try:
        est = _fit(cfg, model, Dataset(X, y), rng, trace=trace_dir is not None)
        if trace_dir is not None and not est.converged and est.trace is not None:
            saved = est.trace.save(trace_path(trace_dir, n, trial_index))
            logger.debug(f"saved fit trace {saved}")
        risk = excess_risk(model, cfg.target, est.beta_hat, cfg.beta_star, m=cfg.mc_eval_m, rng=rng)
        param_dist = float(np.linalg.norm(est.beta_hat - cfg.beta_star))
        aligned = (
            aligned_distance(est.beta_hat, cfg.beta_star)
            if cfg.model == ModelKind.PHASE_RETRIEVAL else nan
        )
        result = TrialResult(
            cfg.model, cfg.d, n, trial_index, cfg.estimator,
            risk.value, risk.standard_error, param_dist, aligned, est.converged, seed,
        )
        trial_logger.trial(n, trial_index, risk.value, est.converged, seed)
    except (CovShiftError, np.linalg.LinAlgError) as e:
        result = TrialResult(
            cfg.model, cfg.d, n, trial_index, cfg.estimator,
            nan, nan, nan, nan, False, seed,
        )
        trial_logger.trial(n, trial_index, nan, False, seed, error=f"{type(e).__name__}: {e}")
    return result


# ==================== 实验 ====================

def run_experiment(
    cfg: ExperimentConfig,
    workers: Optional[int] = None,
    progress: bool = False,
    trace_dir: Optional[Union[str, Path]] = None,
) -> List[TrialResult]:
    """
    运行 |n_grid|·trials 个试验

    Args:
        workers: 线程数，None 时按 COVSHIFT_THREADS / CPU 数
        progress: 在 stderr 显示 tqdm 进度条
        trace_dir: 不收敛试验的拟合轨迹目录，None 时不记录

    Returns:
        按 (n, trial) 排序的结果，行数恒为 |n_grid|·trials
    """
    tasks = [(n, t) for n in cfg.n_grid for t in range(cfg.trials)]
    workers = worker_count(len(tasks)) if workers is None else max(1, int(workers))
    trial_logger.experiment_start(cfg.description, len(tasks), workers)
    start = time.perf_counter()

    with tqdm(total=len(tasks), disable=not progress, desc="trials", unit="trial") as bar:
        def task(job):
            row = run_trial(cfg, *job, trace_dir=trace_dir)
            bar.update(1)
            return row

        if workers == 1:
            rows = [task(job) for job in tasks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(task, tasks))

    rows.sort(key=lambda r: r.sort_key)
    trial_logger.experiment_end(len(rows), time.perf_counter() - start)
    return rows


# ==================== CSV ====================

def _fmt_float(value: float) -> str:
    return format(float(value), ".17g")


def _row_fields(row: TrialResult) -> List[str]:
    return [
        row.model.value,
        str(row.d),
        str(row.n),
        str(row.trial_index),
        row.estimator.value,
        _fmt_float(row.excess_risk),
        _fmt_float(row.excess_risk_se),
        _fmt_float(row.param_dist),
        _fmt_float(row.aligned_dist),
        "true" if row.converged else "false",
        str(row.seed),
    ]


def format_csv(rows: Iterable[TrialResult]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(_row_fields(row))
    return buffer.getvalue()


def write_csv(rows: Iterable[TrialResult], out: Union[str, Path, TextIO]) -> None:
    """写 CSV；out 可以是路径或文本流"""
    text = format_csv(rows)
    if hasattr(out, "write"):
        out.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def _parse_bool(value: str) -> bool:
    if value not in ("true", "false"):
        raise InvalidArgument(f"converged must be true/false, got {value!r}")
    return value == "true"


def read_csv(source: Union[str, Path, TextIO]) -> List[TrialResult]:
    """读取 write_csv 的输出"""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise InvalidArgument(f"unexpected CSV header: {header}")

    rows = []
    for fields in reader:
        if not fields:
            continue
        if len(fields) != len(CSV_HEADER):
            raise InvalidArgument(f"CSV row has {len(fields)} fields, expected {len(CSV_HEADER)}")
        rows.append(TrialResult(
            model=ModelKind(fields[0]),
            d=int(fields[1]),
            n=int(fields[2]),
            trial_index=int(fields[3]),
            estimator=EstimatorKind(fields[4]),
            excess_risk=float(fields[5]),
            excess_risk_se=float(fields[6]),
            param_dist=float(fields[7]),
            aligned_dist=float(fields[8]),
            converged=_parse_bool(fields[9]),
            seed=int(fields[10]),
        ))
    return rows


__all__ = [
    "CSV_HEADER",
    "THREADS_ENV",
    "worker_count",
    "run_trial",
    "run_experiment",
    "format_csv",
    "write_csv",
    "read_csv",
]
