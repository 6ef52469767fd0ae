"""
Covshift Lab - 日志系统
统一的日志管理，控制台输出到 stderr (stdout 留给 CLI 的机器可读输出)

使用方式:
    from src.utils.logger import get_logger, get_trial_logger

    logger = get_logger(__name__)
    logger.debug("牛顿迭代", extra={"iteration": 3, "grad_norm": 1e-9})

    # 试验专用日志
    trial_logger = get_trial_logger(__name__)
    trial_logger.trial(n=1000, trial_index=0, excess_risk=1.2e-3,
                       converged=True, seed=123)

特性:
- 彩色控制台输出
- JSON 格式文件日志 (可选，默认关闭)
- 自动日志轮转
- 结构化试验日志
- 环境变量配置
"""

import json
import logging
import os
import sys
import threading
import time
from contextlib import contextmanager
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional, Union

# ==================== 配置常量 ====================

# 日志级别配置（可通过环境变量覆盖）
DEFAULT_LOG_LEVEL = os.environ.get("COVSHIFT_LOG_LEVEL", "INFO").upper()
DEFAULT_LOG_DIR = os.environ.get("COVSHIFT_LOG_DIR", "logs")
DEFAULT_LOG_FORMAT = os.environ.get(
    "COVSHIFT_LOG_FORMAT",
    "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
)
DEFAULT_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# 文件日志配置
LOG_FILE_MAX_BYTES = int(os.environ.get("COVSHIFT_LOG_MAX_BYTES", 10 * 1024 * 1024))  # 10MB
LOG_FILE_BACKUP_COUNT = int(os.environ.get("COVSHIFT_LOG_BACKUP_COUNT", 5))

# 实验不应在工作目录里留下日志文件，默认关闭
ENABLE_FILE_LOG = os.environ.get("COVSHIFT_ENABLE_FILE_LOG", "false").lower() == "true"

# 是否使用 JSON 格式
USE_JSON_FORMAT = os.environ.get("COVSHIFT_JSON_LOG", "true").lower() == "true"

# 库模块使用 logging.getLogger(__name__)，都挂在包名之下
ROOT_LOGGER_NAME = "src"

# 日志颜色（仅控制台）
COLORS = {
    "DEBUG": "\033[36m",     # 青色
    "INFO": "\033[32m",      # 绿色
    "WARNING": "\033[33m",   # 黄色
    "ERROR": "\033[31m",     # 红色
    "CRITICAL": "\033[35m",  # 紫色
    "RESET": "\033[0m",      # 重置
}

# ==================== 格式化器 ====================


class ColoredFormatter(logging.Formatter):
    """带颜色的控制台日志格式化器"""

    def __init__(self, fmt: str = None, datefmt: str = None, use_colors: bool = True):
        super().__init__(fmt or DEFAULT_LOG_FORMAT, datefmt or DEFAULT_DATE_FORMAT)
        self.use_colors = use_colors and sys.stderr.isatty()

    def format(self, record: logging.LogRecord) -> str:
        original_levelname = record.levelname

        if self.use_colors:
            color = COLORS.get(record.levelname, COLORS["RESET"])
            record.levelname = f"{color}{record.levelname}{COLORS['RESET']}"

        result = super().format(record)
        record.levelname = original_levelname
        return result


# LogRecord 自带的属性，不算 extra 字段
_RECORD_ATTRS = set(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime"}


def _extra_fields(record: logging.LogRecord) -> Dict[str, Any]:
    return {
        key: value for key, value in record.__dict__.items()
        if key not in _RECORD_ATTRS and not key.startswith('_')
    }


class JSONFormatter(logging.Formatter):
    """JSON 格式的日志格式化器（用于文件记录）"""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "thread_name": record.threadName,
        }
        log_data.update(_extra_fields(record))

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, ensure_ascii=False, default=str)


class StructuredFormatter(logging.Formatter):
    """结构化文本格式化器（可读性更好的文件日志）"""

    def format(self, record: logging.LogRecord) -> str:
        timestamp = datetime.fromtimestamp(record.created).strftime(DEFAULT_DATE_FORMAT)
        base = f"[{timestamp}] [{record.levelname:8}] [{record.name}] {record.getMessage()}"

        extras = [f"{key}={value}" for key, value in _extra_fields(record).items()]
        if extras:
            base += f" | {', '.join(extras)}"

        if record.exc_info:
            base += f"\n{self.formatException(record.exc_info)}"

        return base


# ==================== 试验日志适配器 ====================


class TrialLogAdapter(logging.LoggerAdapter):
    """
    试验日志适配器

    专门记录 Monte Carlo 实验中每个 (n, trial) 的结果；
    失败的试验记 ERROR，其余记 DEBUG
    """

    def __init__(self, logger: logging.Logger, extra: dict = None):
        super().__init__(logger, extra or {})
        # 线程池中的 worker 并发调用 trial
        self._counter_lock = threading.Lock()
        self._failed = 0
        self._recorded = 0

    def process(self, msg, kwargs):
        # 合并而不是覆盖调用方的 extra
        kwargs["extra"] = {**self.extra, **kwargs.get("extra", {})}
        return msg, kwargs

    def trial(
        self,
        n: int,
        trial_index: int,
        excess_risk: float,
        converged: bool,
        seed: int,
        error: Optional[str] = None,
        **kwargs
    ):
        """
        记录一次试验

        Args:
            n: 样本量
            trial_index: 试验编号
            excess_risk: 目标域超额风险
            converged: 拟合是否收敛
            seed: 试验种子
            error: 估计器错误信息 (有则该行被标记)
            **kwargs: 其他额外字段
        """
        failed = error is not None
        with self._counter_lock:
            self._recorded += 1
            if failed:
                self._failed += 1

        extra = {
            "event": "trial",
            "n": n,
            "trial_index": trial_index,
            "excess_risk": excess_risk,
            "converged": converged,
            "seed": seed,
            **kwargs
        }
        if failed:
            extra["error"] = error

        status = "✓" if converged else "✗"
        msg = f"[n={n} trial={trial_index}] {status} risk={excess_risk:.4g}"
        if failed:
            msg += f" error: {error}"

        self.log(logging.ERROR if failed else logging.DEBUG, msg, extra=extra)

    def experiment_start(self, description: str, tasks: int, workers: int):
        """记录实验开始"""
        with self._counter_lock:
            self._failed = 0
            self._recorded = 0
        self.info(
            f"=== 实验开始: {description} ({tasks} 个试验, {workers} 个线程) ===",
            extra={"event": "experiment_start", "tasks": tasks, "workers": workers},
        )

    def experiment_end(self, rows: int, duration: float):
        """记录实验结束"""
        failed = self.failed_count
        self.info(
            f"=== 实验结束: {rows} 行, {failed} 行失败, 耗时 {duration:.2f}s ===",
            extra={
                "event": "experiment_end",
                "rows": rows,
                "failed": failed,
                "duration": duration,
            }
        )

    @property
    def failed_count(self) -> int:
        with self._counter_lock:
            return self._failed

    @property
    def recorded_count(self) -> int:
        with self._counter_lock:
            return self._recorded


# ==================== Logger 管理 ====================

# 全局 logger 缓存
_loggers: Dict[str, logging.Logger] = {}
_lock = threading.Lock()


def setup_logger(
    name: str,
    level: str = None,
    log_dir: str = None,
    enable_file: bool = None,
    enable_json: bool = None,
    enable_console: bool = True,
) -> logging.Logger:
    """
    配置并返回一个 Logger 实例

    Args:
        name: Logger 名称
        level: 日志级别 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: 日志文件目录
        enable_file: 是否启用文件日志
        enable_json: 是否使用 JSON 格式记录到文件
        enable_console: 是否启用控制台输出 (stderr)

    Returns:
        配置好的 Logger 实例
    """
    with _lock:
        if name in _loggers:
            return _loggers[name]

        logger = logging.getLogger(name)

        if logger.handlers:
            _loggers[name] = logger
            return logger

        level = level or DEFAULT_LOG_LEVEL
        enable_file = enable_file if enable_file is not None else ENABLE_FILE_LOG
        enable_json = enable_json if enable_json is not None else USE_JSON_FORMAT

        logger.setLevel(getattr(logging, level.upper(), logging.INFO))
        logger.propagate = False

        if enable_console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(logging.DEBUG)
            console_handler.setFormatter(ColoredFormatter(use_colors=True))
            logger.addHandler(console_handler)

        if enable_file:
            log_path = Path(log_dir or DEFAULT_LOG_DIR)
            log_path.mkdir(parents=True, exist_ok=True)

            file_handler = RotatingFileHandler(
                log_path / "covshift.log",
                maxBytes=LOG_FILE_MAX_BYTES,
                backupCount=LOG_FILE_BACKUP_COUNT,
                encoding="utf-8"
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(JSONFormatter() if enable_json else StructuredFormatter())
            logger.addHandler(file_handler)

        _loggers[name] = logger
        return logger


def get_logger(name: str = None) -> logging.Logger:
    """
    获取 Logger 实例（快捷方式）

    Args:
        name: Logger 名称，None 则使用调用者模块名
    """
    if name is None:
        import inspect
        frame = inspect.currentframe()
        if frame and frame.f_back:
            name = frame.f_back.f_globals.get("__name__", ROOT_LOGGER_NAME)

    return setup_logger(name)


def get_trial_logger(name: str = None) -> TrialLogAdapter:
    """获取试验日志适配器"""
    return TrialLogAdapter(get_logger(name))


# ==================== 全局初始化 ====================

_initialized = False


def init_logging(
    level: str = None,
    log_dir: str = None,
    enable_file: bool = None,
    enable_json: bool = None,
) -> logging.Logger:
    """
    初始化全局日志配置

    在 CLI 启动时调用一次；库模块的日志通过传播写到包根 logger
    """
    global _initialized

    root_logger = setup_logger(
        ROOT_LOGGER_NAME,
        level=level,
        log_dir=log_dir,
        enable_file=enable_file,
        enable_json=enable_json
    )
    if level is not None:
        set_level(level)

    _initialized = True
    return root_logger


# ==================== 上下文管理器 ====================

@contextmanager
def log_context(logger: logging.Logger, operation: str, **extra):
    """
    日志上下文管理器

    使用方式:
        with log_context(logger, "fisher_monte_carlo", m=200000) as ctx:
            ...
            ctx["trace"] = 11.33
    """
    start_time = time.perf_counter()
    context = {"operation": operation, **extra}

    logger.debug(f"开始: {operation}", extra=context)

    try:
        yield context
        duration = time.perf_counter() - start_time
        context["duration"] = duration
        context["success"] = True
        logger.debug(f"完成: {operation} ({duration:.3f}s)", extra=context)
    except Exception as e:
        duration = time.perf_counter() - start_time
        context["duration"] = duration
        context["success"] = False
        context["error"] = str(e)
        logger.error(f"失败: {operation} ({duration:.3f}s) - {e}", extra=context)
        raise


def set_level(level: Union[str, int]):
    """设置全局日志级别"""
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)

    for logger in _loggers.values():
        logger.setLevel(level)
