"""
实验框架测试 - 配置 / 运行器 / 速率拟合 / 误设定演示 / 命令行

运行方式:
    pytest tests/test_harness.py -v
    pytest tests/test_harness.py -v -m "not slow"    # 跳过验收规模的 Monte Carlo
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.core.errors import ConfigError, InsufficientGrid, InvalidArgument
from src.core.types import Dataset, EstimatorKind, FisherPair, ModelKind, TrialResult
from src.covariates import BallUniform, SphereShifted, ball_pair
from src.estimators import fit_mle
from src.fisher import (
    fisher_pair,
    sphere_logistic_eigs,
    transfer_trace,
    weighted_information,
)
from src.harness import (
    build_config,
    config_radii,
    format_csv,
    load_config,
    lower_bound_check,
    paired_difference,
    parse_config_text,
    rate_fit,
    read_csv,
    run_experiment,
    summarize,
    write_csv,
)
from src.harness.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from src.harness.misspec import ball_population_mle, misspec_demo, quadratic_target_optimum
from src.harness.runner import THREADS_ENV, trace_path, worker_count
from src.models import BallPiecewiseTruth, LinearRegression
from src.utils.debug import TRACE_DIR_ENV, FitTrace
from src.utils.seeding import trial_seed

CONFIG_DIR = os.path.join(os.path.dirname(__file__), '..', 'configs')

SMALL_CONFIG = """
# 小规模线性实验
model = linear
d = 2
source = gaussian(mean=0)
target = gaussian(mean=1,0)
beta_star = 1,0
estimator = mle
n_grid = 50,100,200,400
trials = 3
seed = 5
"""


def _small_raw(**overrides):
    raw = parse_config_text(SMALL_CONFIG)
    raw.update(overrides)
    return raw


def _row(n, trial, risk, estimator=EstimatorKind.MLE):
    nan = float("nan")
    return TrialResult(ModelKind.LINEAR, 2, n, trial, estimator, risk, 0.0, nan, nan,
                       bool(np.isfinite(risk)), 0)


def _synthetic_rows(ns, trials, risk_of_n):
    return [_row(n, t, risk_of_n(n)) for n in ns for t in range(trials)]


# ==================== 配置 ====================

class TestConfig:
    """配置解析测试"""

    def test_parse_text(self):
        raw = parse_config_text("a = 1  # 注释\n\n# 整行注释\nB = x, y\n")
        assert raw == {"a": "1", "b": "x, y"}

    def test_parse_rejects_line_without_equals(self):
        with pytest.raises(ConfigError):
            parse_config_text("model linear")

    def test_build_small(self):
        cfg = build_config(_small_raw())
        assert cfg.model == ModelKind.LINEAR
        assert cfg.d == 2
        assert cfg.n_grid == [50, 100, 200, 400]
        assert cfg.master_seed == 5
        np.testing.assert_array_equal(cfg.target.mean, [1.0, 0.0])
        np.testing.assert_array_equal(cfg.source.mean, [0.0, 0.0])

    def test_seed_override(self):
        assert build_config(_small_raw(), seed=99).master_seed == 99

    @pytest.mark.parametrize("key", ["model", "trials", "n_grid", "beta_star"])
    def test_missing_key_named(self, key):
        raw = _small_raw()
        del raw[key]
        with pytest.raises(ConfigError) as exc:
            build_config(raw)
        assert exc.value.key == key
        assert key in str(exc.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc:
            build_config(_small_raw(colour="blue"))
        assert exc.value.key == "colour"

    def test_bad_values(self):
        cases = {
            "estimator": "bayes",
            "n_grid": "100,50",
            "d": "zero",
            "beta_star": "1,2,3",
            "target": "cube(side=1)",
        }
        for key, value in cases.items():
            with pytest.raises(ConfigError) as exc:
                build_config(_small_raw(**{key: value}))
            assert exc.value.key == key

    def test_perp_shift(self):
        cfg = build_config(_small_raw(
            model="phase", d="3", beta_star="1,0,0", estimator="phase_mle",
            source="sphere(shift=0)", target="sphere(shift=perp:2)",
        ))
        assert isinstance(cfg.target, SphereShifted)
        assert cfg.target.shift_norm == pytest.approx(2.0)
        assert cfg.target.shift @ cfg.beta_star == pytest.approx(0.0)

    def test_ball_w_builds_pair(self):
        raw = _small_raw(ball_w="8", d="3", beta_star="1,0,0", estimator="mwle")
        del raw["source"], raw["target"]
        cfg = build_config(raw)
        assert isinstance(cfg.source, BallUniform)
        assert cfg.source.radius == pytest.approx(2.0)
        assert cfg.shift_pair().ratio_bound() == pytest.approx(8.0)

    @pytest.mark.parametrize("key", ["source", "target"])
    def test_ball_w_rejects_explicit_domain(self, key):
        raw = _small_raw(ball_w="8", d="3", beta_star="1,0,0", estimator="mwle")
        del raw["source"], raw["target"]
        raw[key] = "ball(radius=1)"
        with pytest.raises(ConfigError) as exc:
            build_config(raw)
        assert exc.value.key == key

    def test_restart_schedule(self):
        assert build_config(_small_raw()).restart_schedule == "geometric"
        assert build_config(_small_raw(restart_schedule="Jittered")).restart_schedule == "jittered"
        with pytest.raises(ConfigError) as exc:
            build_config(_small_raw(restart_schedule="fibonacci"))
        assert exc.value.key == "restart_schedule"

    def test_phase_mle_needs_phase_model(self):
        with pytest.raises(ConfigError) as exc:
            build_config(_small_raw(estimator="phase_mle"))
        assert exc.value.key == "estimator"

    def test_mwle_needs_density_ratio(self):
        with pytest.raises(ConfigError) as exc:
            build_config(_small_raw(
                d="3", beta_star="1,0,0", estimator="mwle",
                source="sphere(shift=0)", target="sphere(shift=perp:1)",
            ))
        assert exc.value.key == "estimator"

    def test_outer_truth_only_for_linear(self):
        with pytest.raises(ConfigError) as exc:
            build_config(_small_raw(model="logistic", beta_star_outer="0,1"))
        assert exc.value.key == "beta_star_outer"

    def test_constrained_needs_radius(self):
        with pytest.raises(ConfigError) as exc:
            build_config(_small_raw(estimator="constrained_mle"))
        assert exc.value.key == "constraint_radius"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as exc:
            load_config(tmp_path / "nope.cfg")
        assert exc.value.key == "config"

    @pytest.mark.parametrize("name", ["linear.cfg", "logistic.cfg", "phase.cfg", "ball_misspec.cfg"])
    def test_bundled_configs_load(self, name):
        cfg = load_config(os.path.join(CONFIG_DIR, name))
        assert len(cfg.n_grid) >= 4
        assert cfg.trials >= 50


# ==================== 运行器 ====================

class TestRunner:
    """实验运行器测试"""

    def test_row_count_and_order(self):
        cfg = build_config(_small_raw())
        rows = run_experiment(cfg, workers=1)
        assert len(rows) == len(cfg.n_grid) * cfg.trials
        assert [r.sort_key for r in rows] == sorted(r.sort_key for r in rows)
        assert all(r.converged for r in rows)
        assert rows[0].seed == trial_seed(5, 50, 0)

    def test_csv_independent_of_workers(self):
        cfg = build_config(_small_raw())
        one = format_csv(run_experiment(cfg, workers=1))
        four = format_csv(run_experiment(cfg, workers=4))
        assert one == four
        assert format_csv(run_experiment(cfg, workers=1)) == one

    def test_csv_independent_of_thread_env(self, monkeypatch):
        cfg = build_config(_small_raw())
        monkeypatch.setenv(THREADS_ENV, "1")
        single = format_csv(run_experiment(cfg))
        monkeypatch.setenv(THREADS_ENV, "8")
        many = format_csv(run_experiment(cfg))
        assert single == many

    def test_seed_changes_output(self):
        a = format_csv(run_experiment(build_config(_small_raw()), workers=1))
        b = format_csv(run_experiment(build_config(_small_raw(), seed=6), workers=1))
        assert a != b

    def test_worker_count(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert worker_count(100) == 3
        assert worker_count(2) == 2
        monkeypatch.setenv(THREADS_ENV, "many")
        assert worker_count(1) == 1

    def test_linear_risk_is_closed_form(self):
        rows = run_experiment(build_config(_small_raw()), workers=1)
        assert all(r.excess_risk > 0 and r.excess_risk_se == 0.0 for r in rows)
        assert all(math.isnan(r.aligned_dist) for r in rows)

    def test_failed_trials_are_marked(self):
        # 源域半径 1000，n=2 时几乎不会有样本落进目标球
        raw = _small_raw(d="1", beta_star="1", estimator="mwle", ball_w="1000",
                         n_grid="2", trials="5")
        del raw["source"], raw["target"]
        rows = run_experiment(build_config(raw), workers=1)
        assert len(rows) == 5
        failed = [r for r in rows if not r.converged]
        assert failed
        assert all(math.isnan(r.excess_risk) for r in failed)

    def test_csv_format(self, tmp_path):
        rows = run_experiment(build_config(_small_raw(n_grid="50", trials="2")), workers=1)
        path = tmp_path / "r.csv"
        write_csv(rows, path)
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        assert lines[0] == "model,d,n,trial,estimator,excess_risk,excess_risk_se,param_dist,aligned_dist,converged,seed"
        assert lines[1].startswith("linear,2,50,0,mle,")
        assert lines[1].split(",")[9] == "true"
        assert [r.seed for r in read_csv(path)] == [r.seed for r in rows]

    def test_trace_dir_saves_non_converged(self, tmp_path):
        # 一次牛顿迭代达不到 grad_tol，每个试验都不收敛
        cfg = build_config(_small_raw(model="logistic", max_iterations="1", n_grid="100", trials="2"))
        plain = run_experiment(cfg, workers=1)
        traced = run_experiment(cfg, workers=2, trace_dir=tmp_path / "traces")

        assert format_csv(plain) == format_csv(traced)
        assert not any(r.converged for r in traced)
        saved = sorted(p.name for p in (tmp_path / "traces").iterdir())
        assert saved == ["n100_trial0.json", "n100_trial1.json"]

        trace = FitTrace.load(trace_path(tmp_path / "traces", 100, 1))
        assert trace.solver == "newton"
        assert trace.converged is False
        assert trace.total_iterations == 2

    def test_trace_dir_skips_converged(self, tmp_path):
        run_experiment(build_config(_small_raw(n_grid="50", trials="2")), workers=1, trace_dir=tmp_path)
        assert list(tmp_path.iterdir()) == []

    def test_phase_jittered_schedule_deterministic(self):
        raw = _small_raw(
            model="phase", d="2", beta_star="1,0", estimator="phase_mle",
            source="sphere(shift=0)", target="sphere(shift=0)",
            n_grid="60", trials="2", restarts="3", restart_schedule="jittered",
        )
        a = run_experiment(build_config(raw), workers=1)
        b = run_experiment(build_config(raw), workers=2)

        assert format_csv(a) == format_csv(b)
        assert all(r.converged for r in a)

    def test_read_csv_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(InvalidArgument):
            read_csv(path)


# ==================== 速率与汇总 ====================

class TestRate:
    """速率拟合测试"""

    NS = (100, 200, 400, 800)

    def test_exact_inverse_n(self):
        rows = _synthetic_rows(self.NS, 50, lambda n: 3.0 / n)
        report = rate_fit(rows, trace=6.0)
        assert report.slope == pytest.approx(-1.0, abs=1e-12)
        assert report.r_squared == pytest.approx(1.0)
        assert report.intercept == pytest.approx(math.log(3.0))
        assert all(v == pytest.approx(0.5) for v in report.normalized_levels.values())
        assert report.trials_per_n == {n: 50 for n in self.NS}

    def test_needs_four_grid_points(self):
        with pytest.raises(InsufficientGrid):
            rate_fit(_synthetic_rows(self.NS[:3], 50, lambda n: 1.0 / n))

    def test_needs_fifty_trials(self):
        with pytest.raises(InsufficientGrid):
            rate_fit(_synthetic_rows(self.NS, 49, lambda n: 1.0 / n))

    def test_failed_rows_excluded(self):
        rows = _synthetic_rows(self.NS, 50, lambda n: 1.0 / n)
        rows += [_row(n, 50, float("nan")) for n in self.NS]
        report = rate_fit(rows)
        assert report.slope == pytest.approx(-1.0)
        assert report.trials_per_n[100] == 50

    def test_bad_trace(self):
        with pytest.raises(InvalidArgument):
            rate_fit(_synthetic_rows(self.NS, 50, lambda n: 1.0 / n), trace=0.0)

    def test_summarize(self):
        rows = [_row(10, t, float(t)) for t in range(5)] + [_row(10, 5, float("nan"))]
        (s,) = summarize(rows)
        assert (s.n, s.count, s.failed) == (10, 5, 1)
        assert s.mean == pytest.approx(2.0)
        assert s.q50 == pytest.approx(2.0)
        assert s.standard_error == pytest.approx(np.std(np.arange(5), ddof=1) / math.sqrt(5))

    def test_paired_difference(self):
        rng = np.random.default_rng(0)
        noise = rng.random(20)
        rows_a = [_row(100, t, 1.0 + noise[t]) for t in range(20)]
        rows_b = [_row(100, t, 0.5 + noise[t], EstimatorKind.MWLE) for t in range(20)]
        mean, se = paired_difference(rows_a, rows_b, 100)
        assert mean == pytest.approx(0.5)
        assert se == pytest.approx(0.0, abs=1e-12)

    def test_paired_difference_needs_pairs(self):
        with pytest.raises(InsufficientGrid):
            paired_difference([_row(100, 0, 1.0)], [_row(100, 0, 1.0)], 100)

    def test_lower_bound_check(self):
        pair = FisherPair(np.eye(2), np.eye(2))
        rows = _synthetic_rows(self.NS, 3, lambda n: 2.0 / (2.0 * n))
        checks = lower_bound_check(rows, pair, R1=0.25)
        assert [c.n for c in checks] == list(self.NS)
        assert all(c.holds for c in checks)
        assert checks[0].normalized_risk == pytest.approx(1.0 / 200.0)

    def test_config_radii_linear(self):
        cfg = load_config(os.path.join(CONFIG_DIR, "linear.cfg"))
        pair = fisher_pair(cfg.model_family(), cfg.source, cfg.target, cfg.beta_star)

        R0, R1 = config_radii(cfg, pair)

        assert R0 == pytest.approx(1.0)
        assert R1 == pytest.approx(0.25 * math.sqrt(1.0 / 5.0))
        assert config_radii(cfg, pair, prior_radius=0.5)[0] == pytest.approx(0.5)

    def test_config_radii_uses_shift(self):
        pair = FisherPair(np.eye(3), np.eye(3))
        radii = {}
        for r in (0, 2):
            cfg = build_config({
                "model": "logistic", "d": "3", "source": "sphere(shift=0)",
                "target": f"sphere(shift=perp:{r})", "beta_star": "1,0,0",
                "estimator": "mle", "n_grid": "100", "trials": "2", "seed": "1",
            })
            radii[r] = config_radii(cfg, pair)

        # 逻辑回归 B3 = L_T = (√d + r)³，R0 由第二项决定
        for r, (R0, R1) in radii.items():
            assert R0 == pytest.approx(1.0 / (6.0 * (math.sqrt(3) + r) ** 3))
            assert R1 == pytest.approx(0.25 * R0)


# ==================== 误设定 ====================

class TestMisspec:
    """误设定演示测试"""

    def test_target_optimum(self):
        assert quadratic_target_optimum(1.0) == pytest.approx(2.0)
        assert quadratic_target_optimum(0.0) == 0.0

    def test_no_shift_estimates_agree(self):
        r = misspec_demo(0.0, 2000, np.random.default_rng(0))
        assert r.beta_mle == pytest.approx(r.beta_mwle, rel=1e-12, abs=1e-12)

    def test_mle_limit_and_sign(self):
        r = misspec_demo(1.0, 20_000, np.random.default_rng(1))
        assert r.beta_star == pytest.approx(2.0)
        assert r.beta_mle == pytest.approx(-2.0, rel=0.1)
        assert r.beta_mwle > 0

    def test_invalid_arguments(self):
        with pytest.raises(InvalidArgument):
            misspec_demo(-1.0, 1000, np.random.default_rng(2))
        with pytest.raises(InvalidArgument):
            misspec_demo(1.0, 99, np.random.default_rng(2))

    @pytest.mark.slow
    def test_mwle_band(self):
        # 权重 e^{2x} 的二阶矩很大，n=2·10⁴ 时 MWLE 的标准误约 0.7
        r = misspec_demo(1.0, 5_000_000, np.random.default_rng(3))
        assert r.beta_mwle == pytest.approx(2.0, rel=0.1)
        assert r.beta_mle == pytest.approx(-2.0, rel=0.1)

    @pytest.mark.slow
    def test_opposite_signs_over_seeds(self):
        opposite = 0
        for seed in range(100):
            r = misspec_demo(1.0, 20_000, np.random.default_rng(seed))
            opposite += np.sign(r.beta_mle) == -np.sign(r.beta_mwle)
        assert opposite >= 99

    def test_ball_population_mle(self):
        np.testing.assert_allclose(ball_population_mle(1.0, 2, [1.0, 0.0], [0.0, 1.0]), [1.0, 0.0])
        np.testing.assert_allclose(
            ball_population_mle(8.0, 3, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            [1.0 / 32.0, 31.0 / 32.0, 0.0],
        )

    def test_ball_population_mle_matches_fit(self):
        pair = ball_pair(8.0, 3)
        rng = np.random.default_rng(4)
        inner, outer = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        X = pair.source.sample_batch(400_000, rng)
        y = BallPiecewiseTruth(inner, outer, 1.0).sample(X, rng)
        est = fit_mle(LinearRegression(), Dataset(X, y))
        np.testing.assert_allclose(est.beta_hat, ball_population_mle(8.0, 3, inner, outer), atol=0.02)


# ==================== 命令行 ====================

@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return str(path)


@pytest.fixture
def rate_csv(tmp_path):
    path = tmp_path / "rate.csv"
    write_csv(_synthetic_rows((100, 200, 400, 800), 50, lambda n: 3.0 / n), path)
    return str(path)


class TestCli:
    """命令行测试"""

    def test_simulate_to_file(self, small_config, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["simulate", "--config", small_config, "--out", str(out), "-q"]) == EXIT_OK
        assert len(read_csv(out)) == 12

    def test_simulate_deterministic_across_threads(self, small_config, tmp_path, monkeypatch):
        outputs = []
        for threads in ("1", "8"):
            monkeypatch.setenv(THREADS_ENV, threads)
            out = tmp_path / f"r{threads}.csv"
            assert main(["simulate", "--config", small_config, "--out", str(out), "-q"]) == EXIT_OK
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_simulate_needs_config(self, capsys):
        assert main(["simulate", "-q"]) == EXIT_CONFIG
        assert "config" in capsys.readouterr().err

    def test_config_error_names_key(self, tmp_path, capsys):
        path = tmp_path / "broken.cfg"
        path.write_text(SMALL_CONFIG.replace("trials = 3", ""), encoding="utf-8")
        assert main(["simulate", "--config", str(path), "-q"]) == EXIT_CONFIG
        assert "trials" in capsys.readouterr().err

    def test_bad_seed_is_usage_error(self, small_config):
        assert main(["simulate", "--config", small_config, "--seed", "-1"]) == EXIT_CONFIG

    def test_unknown_command(self):
        assert main(["teleport"]) == EXIT_CONFIG

    def test_rate_prints_slope(self, rate_csv, capsys):
        assert main(["rate", "--in", rate_csv, "-q"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "slope=-1.000" in out
        assert "n=100" in out

    def test_rate_table(self, rate_csv, tmp_path):
        out = tmp_path / "rate_table.csv"
        assert main(["rate", "--in", rate_csv, "--trace", "3", "--out", str(out), "-q"]) == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "n,mean_risk,normalized_level,trials"
        fields = lines[1].split(",")
        assert fields[0] == "100"
        assert float(fields[2]) == pytest.approx(1.0)
        assert fields[3] == "50"

    def test_rate_missing_file(self, tmp_path, capsys):
        assert main(["rate", "--in", str(tmp_path / "none.csv"), "-q"]) == EXIT_RUNTIME
        assert capsys.readouterr().err

    def test_rate_insufficient_grid(self, tmp_path):
        path = tmp_path / "short.csv"
        write_csv(_synthetic_rows((100, 200), 50, lambda n: 1.0 / n), path)
        assert main(["rate", "--in", str(path), "-q"]) == EXIT_RUNTIME

    def test_fisher(self, small_config, capsys):
        assert main(["fisher", "--config", small_config, "-q"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "transfer_trace=3\n" in out
        assert "transfer_norm=2\n" in out
        assert "sample_size_threshold=" in out

    def test_lowerbound(self, small_config, capsys):
        assert main(["lowerbound", "--config", small_config, "-q"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("# R1=")
        assert lines[1] == "n,bound"
        assert [line.split(",")[0] for line in lines[2:]] == ["50", "100", "200", "400"]

    def test_concentration(self, capsys):
        args = ["concentration", "--generator", "gaussian", "--n", "1000", "--trials", "1000", "-q"]
        assert main(args) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "generator,threshold,exceedance,delta,covered"
        assert lines[1].startswith("gaussian,")
        assert lines[1].endswith(",true")

    def test_concentration_delta_out_of_range(self):
        assert main(["concentration", "--delta", "0.9", "--trials", "1000", "-q"]) == EXIT_RUNTIME

    def test_simulate_trace_dir_then_trace(self, tmp_path, capsys):
        path = tmp_path / "logistic.cfg"
        path.write_text(
            SMALL_CONFIG.replace("linear", "logistic") + "max_iterations = 1\n", encoding="utf-8"
        )
        traces = tmp_path / "traces"
        args = ["simulate", "--config", str(path), "--out", str(tmp_path / "r.csv"), "-q"]
        assert main(args + ["--trace-dir", str(traces)]) == EXIT_OK
        assert len(list(traces.iterdir())) == 12

        capsys.readouterr()
        assert main(["trace", "--in", str(trace_path(traces, 400, 2)), "-q"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "solver=newton"
        assert "converged=False" in lines
        assert "iterations=2" in lines
        assert any(line.startswith("attempt 0: loss=") for line in lines)

    def test_trace_dir_from_env(self, small_config, tmp_path, monkeypatch):
        monkeypatch.setenv(TRACE_DIR_ENV, str(tmp_path / "env_traces"))
        assert main(["simulate", "--config", small_config, "--out", str(tmp_path / "r.csv"), "-q"]) == EXIT_OK
        # 线性模型的正规方程都收敛，没有轨迹需要写
        assert not (tmp_path / "env_traces").exists()

    def test_trace_rejects_other_json(self, tmp_path, capsys):
        path = tmp_path / "other.json"
        path.write_text('{"a": 1}', encoding="utf-8")
        assert main(["trace", "--in", str(path), "-q"]) == EXIT_CONFIG
        assert "not a fit trace" in capsys.readouterr().err

    def test_misspec(self, capsys):
        assert main(["misspec", "--mu", "0,1", "--n", "1000", "--seed", "3", "-q"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "mu,n,beta_mle,beta_mwle,beta_star"
        assert len(lines) == 3
        assert lines[2].startswith("1,1000,")


# ==================== 验收规模 ====================

@pytest.mark.slow
class TestAcceptance:
    """验收规模的 Monte Carlo 实验"""

    def test_linear_rate_and_lower_bound(self):
        cfg = load_config(os.path.join(CONFIG_DIR, "linear.cfg"))
        rows = run_experiment(cfg)
        trace = 4.0 + 5.0  # ‖α‖² + σ²d
        report = rate_fit(rows, trace=trace)
        assert -1.15 <= report.slope <= -0.85
        for n, level in report.normalized_levels.items():
            if n >= 800:
                assert 0.4 <= level <= 0.6

        pair = fisher_pair(cfg.model_family(), cfg.source, cfg.target, cfg.beta_star)
        assert transfer_trace(pair) == pytest.approx(trace)
        _, R1 = config_radii(cfg, pair)
        assert all(c.holds for c in lower_bound_check(rows, pair, R1))

    def test_logistic_shift_scaling(self):
        d = 3
        eigs = sphere_logistic_eigs(d, m=10 ** 6, rng=np.random.default_rng(0))
        means = {}
        for r in (0, 2, 4):
            cfg = build_config({
                "model": "logistic", "d": str(d), "source": "sphere(shift=0)",
                "target": f"sphere(shift=perp:{r})", "beta_star": "1,0,0",
                "estimator": "mle", "n_grid": "5000", "trials": "300", "seed": "17",
            })
            risks = [row.excess_risk for row in run_experiment(cfg)]
            means[r] = float(np.nanmean(risks))
        for r in (2, 4):
            predicted = (d + r * r * eigs.lambda3 / eigs.lambda2) / d
            assert 0.5 <= (means[r] / means[0]) / predicted <= 2.0

    def test_mwle_not_better_than_mle(self):
        base = {
            "model": "linear", "d": "3", "source": "ball(radius=2)", "target": "ball(radius=1)",
            "beta_star": "1,-1,0.5", "n_grid": "1000", "trials": "500", "seed": "23",
        }
        mle = run_experiment(build_config({**base, "estimator": "mle"}))
        mwle = run_experiment(build_config({**base, "estimator": "mwle"}))
        mean, se = paired_difference(mle, mwle, 1000)
        assert mean <= 2 * se

        cfg = build_config({**base, "estimator": "mwle"})
        weighted = weighted_information(cfg.model_family(), cfg.shift_pair(), cfg.beta_star,
                                        200_000, np.random.default_rng(1))
        pair = fisher_pair(cfg.model_family(), cfg.source, cfg.target, cfg.beta_star)
        assert weighted.trace >= transfer_trace(pair) - 4 * weighted.trace_se


# 运行测试
if __name__ == "__main__":
    pytest.main([__file__, "-v"])
