"""
Fit Tracing - 拟合过程记录

提供求解器的逐迭代记录:
- 每次迭代的损失、梯度范数、步长
- 多起点拟合中每个起点的结果
- JSON 保存 / 加载，便于离线检查不收敛的试验

使用方式:
    from src.utils.debug import FitTrace

    trace = FitTrace(solver="newton")
    trace.record(iteration=0, loss=0.69, grad_norm=0.5, step=1.0)
    trace.finish(converged=True)
    trace.save("traces/n200_trial3.json")

    # FitOptions(trace=True) 时估计器自动附加到 Estimate.trace；
    # covshift simulate --trace-dir DIR 把不收敛试验的记录写到 DIR，
    # covshift trace --in FILE 打印摘要
"""

import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Union

# ==================== 配置 ====================

TRACE_DIR_ENV = "COVSHIFT_TRACE_DIR"


def default_trace_dir() -> Optional[str]:
    """COVSHIFT_TRACE_DIR，未设置时为 None (不保存)"""
    return os.environ.get(TRACE_DIR_ENV) or None


@dataclass
class TraceFrame:
    """单次迭代记录"""
    iteration: int
    loss: float
    grad_norm: float
    step: float
    attempt: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TraceFrame":
        return cls(**data)


@dataclass
class FitTrace:
    """一次拟合的完整记录"""
    solver: str
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    frames: List[TraceFrame] = field(default_factory=list)
    converged: bool = False
    notes: List[str] = field(default_factory=list)

    def record(
        self,
        iteration: int,
        loss: float,
        grad_norm: float,
        step: float,
        attempt: int = 0,
    ) -> None:
        self.frames.append(
            TraceFrame(int(iteration), float(loss), float(grad_norm), float(step), int(attempt))
        )

    def note(self, message: str) -> None:
        self.notes.append(message)

    def finish(self, converged: bool) -> "FitTrace":
        self.converged = bool(converged)
        self.end_time = time.time()
        return self

    @property
    def total_iterations(self) -> int:
        return len(self.frames)

    def losses(self, attempt: Optional[int] = None) -> List[float]:
        return [f.loss for f in self.frames if attempt is None or f.attempt == attempt]

    def to_dict(self) -> dict:
        return {
            **asdict(self),
            "frames": [f.to_dict() for f in self.frames]
        }

    def summary(self) -> dict:
        """按起点汇总: 迭代数与最终损失"""
        attempts = sorted({f.attempt for f in self.frames})
        last = self.frames[-1] if self.frames else None
        return {
            "solver": self.solver,
            "converged": self.converged,
            "iterations": self.total_iterations,
            "attempts": len(attempts),
            "final_loss": last.loss if last else float("nan"),
            "final_grad_norm": last.grad_norm if last else float("nan"),
            "attempt_losses": {a: self.losses(a)[-1] for a in attempts},
            "notes": list(self.notes),
        }

    def save(self, path: Union[str, Path]) -> str:
        """保存到 JSON 文件 (自动创建目录)，返回路径"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2)
        return str(path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FitTrace":
        """从文件加载"""
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)

        data["frames"] = [TraceFrame.from_dict(f) for f in data["frames"]]
        return cls(**data)


__all__ = ["FitTrace", "TraceFrame", "TRACE_DIR_ENV", "default_trace_dir"]
