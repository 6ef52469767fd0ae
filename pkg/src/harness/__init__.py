"""
Harness Module - 实验框架

包含:
- config: key = value 实验配置
- runner: 带种子的试验循环与 CSV
- rate: 速率拟合、汇总、下界比较
- misspec: 误设定演示
- cli: covshift 命令行
"""

from .config import ExperimentConfig, build_config, load_config, parse_config_text
from .misspec import MisspecResult, ball_population_mle, misspec_demo, quadratic_target_optimum
from .rate import (
    LowerBoundRow,
    RiskSummary,
    config_radii,
    lower_bound_check,
    paired_difference,
    rate_fit,
    summarize,
)
from .runner import CSV_HEADER, format_csv, read_csv, run_experiment, run_trial, write_csv

__all__ = [
    # Config
    "ExperimentConfig",
    "build_config",
    "load_config",
    "parse_config_text",
    # Runner
    "CSV_HEADER",
    "run_experiment",
    "run_trial",
    "format_csv",
    "write_csv",
    "read_csv",
    # Rate
    "rate_fit",
    "summarize",
    "paired_difference",
    "lower_bound_check",
    "config_radii",
    "RiskSummary",
    "LowerBoundRow",
    # Misspec
    "MisspecResult",
    "misspec_demo",
    "quadratic_target_optimum",
    "ball_population_mle",
]
