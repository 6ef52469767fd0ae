"""
Utils Module - 工具模块

包含:
- logger: 日志系统
- debug: 拟合过程记录
- seeding: 试验随机流派生
"""

from .debug import TRACE_DIR_ENV, FitTrace, TraceFrame, default_trace_dir
from .logger import (
    TrialLogAdapter,
    get_logger,
    get_trial_logger,
    init_logging,
    log_context,
    set_level,
    setup_logger,
)
from .seeding import trial_rng, trial_seed

__all__ = [
    # Logger
    "get_logger",
    "get_trial_logger",
    "init_logging",
    "setup_logger",
    "set_level",
    "TrialLogAdapter",
    "log_context",
    # Debug
    "FitTrace",
    "TraceFrame",
    "TRACE_DIR_ENV",
    "default_trace_dir",
    # Seeding
    "trial_seed",
    "trial_rng",
]
