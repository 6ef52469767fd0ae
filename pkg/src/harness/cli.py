"""
Command Line - covshift 命令行

子命令:
    simulate       运行配置中的实验，输出逐试验 CSV
    rate           读取 CSV，拟合 log-log 斜率与归一化水平
    fisher         打印配置对应的 I_S / I_T、迁移迹、算子范数与样本量门槛
    lowerbound     在配置的 n_grid 上打印 van Trees 下界 (可选与 CSV 对比)
    concentration  向量浓缩不等式的覆盖率检查
    misspec        一维误设定演示: MLE 与 MWLE 的极限
    trace          打印 simulate --trace-dir 保存的拟合轨迹摘要

退出码: 0 成功，1 运行时错误，2 配置 / 参数错误

使用方式:
    covshift simulate --config configs/linear.cfg --seed 42 --out r.csv
    covshift rate --in r.csv --config configs/linear.cfg
    python -m src.harness.cli misspec --mu 0,0.5,1
"""

import argparse
import csv
import sys
from typing import List, Optional, Sequence, TextIO

import numpy as np

from ..bounds import (
    bounded_sphere_generator,
    concentration_check,
    concentration_threshold,
    gaussian_generator,
    van_trees_bound,
    van_trees_threshold,
)
from ..core.errors import ConfigError, CovShiftError, UnsupportedPair
from ..fisher import (
    assumption_constants,
    fisher_pair,
    sample_size_threshold,
    transfer_norm,
    transfer_trace,
    weighted_information,
    weighted_sample_size_threshold,
)
from ..utils.debug import FitTrace, default_trace_dir
from ..utils.logger import get_logger, init_logging
from .config import UINT64_MAX, ExperimentConfig, load_config
from .misspec import misspec_demo
from .rate import config_radii, lower_bound_check, rate_fit, summarize
from .runner import read_csv, run_experiment, write_csv

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

DEFAULT_FISHER_M = 200_000


# ==================== 参数类型 ====================

def _u64(value: str) -> int:
    try:
        seed = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}")
    if not 0 <= seed <= UINT64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _float_list(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}")


# ==================== 输出 ====================

class _Output:
    """--out 给出时写文件，否则写 stdout"""

    def __init__(self, path: Optional[str]):
        self.path = path
        self._handle: Optional[TextIO] = None

    def __enter__(self) -> TextIO:
        if self.path is None:
            return sys.stdout
        self._handle = open(self.path, "w", encoding="utf-8", newline="")
        return self._handle

    def __exit__(self, *exc):
        if self._handle is not None:
            self._handle.close()
        return False


def _write_table(out: TextIO, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def _matrix(M: np.ndarray) -> str:
    return np.array2string(M, precision=6, suppress_small=True, max_line_width=120)


# ==================== 公共 ====================

def _require_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("config", f"--config is required for '{args.command}'")
    return load_config(args.config, seed=args.seed)


def _config_pair(cfg: ExperimentConfig, m: int):
    rng = np.random.default_rng(cfg.master_seed)
    return fisher_pair(cfg.model_family(), cfg.source, cfg.target, cfg.beta_star, m=m, rng=rng)


# ==================== 子命令 ====================

def cmd_simulate(args) -> int:
    cfg = _require_config(args)
    rows = run_experiment(cfg, progress=args.progress, trace_dir=args.trace_dir)
    with _Output(args.out) as out:
        write_csv(rows, out)
    failed = sum(1 for r in rows if not r.converged)
    if failed:
        logger.warning(f"{failed}/{len(rows)} trials did not converge")
        if args.trace_dir is not None:
            logger.warning(f"fit traces of non-converged trials are in {args.trace_dir}")
    return EXIT_OK


def cmd_rate(args) -> int:
    rows = read_csv(args.in_path)
    trace = args.trace
    if trace is None and args.config is not None:
        trace = transfer_trace(_config_pair(_require_config(args), args.m))
    report = rate_fit(rows, trace=1.0 if trace is None else trace)

    print(f"slope={report.slope:.3f}")
    print(f"intercept={report.intercept:.3f}")
    print(f"r_squared={report.r_squared:.3f}")

    if args.out is not None:
        table = [
            (n, report.mean_risk[n], report.normalized_levels[n], report.trials_per_n[n])
            for n in sorted(report.mean_risk)
        ]
        with _Output(args.out) as out:
            _write_table(out, ("n", "mean_risk", "normalized_level", "trials"), table)
    else:
        for s in summarize(rows):
            print(
                f"n={s.n} mean={s.mean:.6g} se={s.standard_error:.3g} "
                f"q90={s.q90:.6g} failed={s.failed}"
            )
    return EXIT_OK


def cmd_fisher(args) -> int:
    cfg = _require_config(args)
    pair = _config_pair(cfg, args.m)
    consts = assumption_constants(cfg.model, cfg.d, cfg.shift_radius)

    print(f"# {cfg.description}")
    print("I_S =")
    print(_matrix(pair.I_S))
    print("I_T =")
    print(_matrix(pair.I_T))
    print(f"transfer_trace={transfer_trace(pair):.6g}")
    print(f"transfer_norm={transfer_norm(pair):.6g}")
    print(f"sample_size_threshold={sample_size_threshold(consts.B1, consts.B2, consts.B3, consts.gamma, pair):.6g}")

    shift = cfg.shift_pair()
    try:
        W = shift.ratio_bound()
    except UnsupportedPair:
        return EXIT_OK
    if np.isfinite(W):
        model = cfg.model_family()
        rng = np.random.default_rng(cfg.master_seed)
        weighted = weighted_information(model, shift, cfg.beta_star, args.m, rng, truth=cfg.truth(model))
        print(f"ratio_bound={W:.6g}")
        print(f"weighted_trace={weighted.trace:.6g} se={weighted.trace_se:.3g}")
        n_star = weighted_sample_size_threshold(consts.B1, consts.B2, consts.B3, consts.gamma, W, weighted)
        print(f"weighted_sample_size_threshold={n_star:.6g}")
    return EXIT_OK


def cmd_lowerbound(args) -> int:
    cfg = _require_config(args)
    pair = _config_pair(cfg, args.m)
    _, R1 = config_radii(cfg, pair, args.prior_radius)
    print(f"# R1={R1:.6g} N0={van_trees_threshold(pair, R1, cfg.d):.6g}")

    if args.in_path is not None:
        checks = lower_bound_check(read_csv(args.in_path), pair, R1)
        table = [(c.n, c.normalized_risk, c.bound, "true" if c.holds else "false") for c in checks]
        header = ("n", "normalized_risk", "bound", "holds")
    else:
        table = [(n, van_trees_bound(pair, R1, cfg.d, n)) for n in cfg.n_grid]
        header = ("n", "bound")

    with _Output(args.out) as out:
        _write_table(out, header, table)
    return EXIT_OK


def cmd_concentration(args) -> int:
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    names = ("sphere", "gaussian") if args.generator == "both" else (args.generator,)
    builders = {"sphere": bounded_sphere_generator, "gaussian": gaussian_generator}

    table = []
    for name in names:
        gen = builders[name](args.d)
        threshold = concentration_threshold(gen.v, gen.B, gen.p, args.n, args.delta, args.c)
        freq = concentration_check(gen, args.n, args.delta, args.trials, args.c, rng)
        table.append((name, threshold, freq, args.delta, "true" if freq <= args.delta else "false"))

    with _Output(args.out) as out:
        _write_table(out, ("generator", "threshold", "exceedance", "delta", "covered"), table)
    return EXIT_OK


def cmd_misspec(args) -> int:
    if args.config is not None:
        logger.info("misspec ignores --config; the construction is fixed by --mu and --n")
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    table = []
    for mu in args.mu:
        r = misspec_demo(mu, args.n, rng)
        table.append((r.mu, r.n, r.beta_mle, r.beta_mwle, r.beta_star))

    with _Output(args.out) as out:
        _write_table(out, ("mu", "n", "beta_mle", "beta_mwle", "beta_star"), table)
    return EXIT_OK


def cmd_trace(args) -> int:
    try:
        summary = FitTrace.load(args.in_path).summary()
    except (KeyError, TypeError) as e:
        raise ConfigError("in", f"{args.in_path} is not a fit trace: {e}") from e
    with _Output(args.out) as out:
        for key in ("solver", "converged", "iterations", "attempts", "final_loss", "final_grad_norm"):
            value = summary[key]
            out.write(f"{key}={format(value, '.6g') if isinstance(value, float) else value}\n")
        for attempt, loss in summary["attempt_losses"].items():
            out.write(f"attempt {attempt}: loss={loss:.6g}\n")
        for note in summary["notes"]:
            out.write(f"note: {note}\n")
    return EXIT_OK


# ==================== 解析器 ====================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value 实验配置文件")
    common.add_argument("--seed", type=_u64, help="覆盖配置中的 master seed (u64)")
    common.add_argument("--out", help="输出文件，缺省为 stdout")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="DEBUG 日志")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="只输出警告和错误")

    parser = argparse.ArgumentParser(prog="covshift", description="covariate shift estimation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run a configured experiment to CSV")
    p.add_argument("--progress", action="store_true", help="在 stderr 显示进度条")
    p.add_argument(
        "--trace-dir", default=default_trace_dir(),
        help="不收敛试验的拟合轨迹目录 (缺省取 COVSHIFT_TRACE_DIR，未设置则不记录)",
    )
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("rate", parents=[common], help="log-log rate fit of a results CSV")
    p.add_argument("--in", dest="in_path", required=True, help="simulate 输出的 CSV")
    p.add_argument("--trace", type=float, help="归一化用的 Tr(I_T I_S⁻¹)")
    p.add_argument("--m", type=int, default=DEFAULT_FISHER_M, help="Fisher Monte Carlo 样本数")
    p.set_defaults(handler=cmd_rate)

    p = sub.add_parser("fisher", parents=[common], help="Fisher matrices and thresholds of a config")
    p.add_argument("--m", type=int, default=DEFAULT_FISHER_M)
    p.set_defaults(handler=cmd_fisher)

    p = sub.add_parser("lowerbound", parents=[common], help="van Trees bound over the config's n_grid")
    p.add_argument("--in", dest="in_path", help="可选: 与该 CSV 的归一化风险对比")
    p.add_argument("--prior-radius", type=float, default=1.0, help="先验立方体半宽 B")
    p.add_argument("--m", type=int, default=DEFAULT_FISHER_M)
    p.set_defaults(handler=cmd_lowerbound)

    p = sub.add_parser("concentration", parents=[common], help="vector concentration coverage")
    p.add_argument("--generator", choices=("sphere", "gaussian", "both"), default="both")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--c", type=float, default=4.0)
    p.set_defaults(handler=cmd_concentration)

    p = sub.add_parser("misspec", parents=[common], help="1-D misspecified MLE vs MWLE")
    p.add_argument("--mu", type=_float_list, default=[0.0, 0.5, 1.0])
    p.add_argument("--n", type=int, default=20_000)
    p.set_defaults(handler=cmd_misspec)

    p = sub.add_parser("trace", parents=[common], help="summarize a saved fit trace")
    p.add_argument("--in", dest="in_path", required=True, help="simulate --trace-dir 写出的 JSON")
    p.set_defaults(handler=cmd_trace)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    level = "DEBUG" if args.verbose else "WARNING" if args.quiet else None
    init_logging(level=level)

    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"covshift {args.command}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (CovShiftError, OSError, ValueError) as e:
        print(f"covshift {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
