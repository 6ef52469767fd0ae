"""
Fisher 信息测试 - 闭式 / Monte Carlo / 迹泛函 / 样本量门槛

运行方式:
    pytest tests/test_fisher.py -v
"""

import os
import sys

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import expit

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.core.errors import InvalidArgument, SingularSource, Unsupported
from src.core.types import FisherPair, ModelKind, WeightedPair
from src.covariates import BallUniform, GaussianCovariate, ShiftPair, SphereShifted, ball_pair
from src.fisher import (
    assumption_constants,
    fisher_closed_form,
    fisher_matrix,
    fisher_monte_carlo,
    fisher_pair,
    linear_threshold,
    linear_transfer_trace,
    logistic_threshold,
    phase_threshold,
    sample_size_threshold,
    sphere_logistic_eigs,
    sphere_phase_eigs,
    sphere_transfer_norm,
    sphere_transfer_trace,
    transfer_norm,
    transfer_trace,
    weighted_information,
    weighted_sample_size_threshold,
)
from src.models import LinearRegression, LogisticRegression, PhaseRetrieval


def _e(d, i):
    v = np.zeros(d)
    v[i] = 1.0
    return v


class TestClosedForm:
    """闭式 Fisher 测试"""

    def test_linear_gaussian(self):
        alpha = np.array([2.0, 0.0, 0.0])
        I_T = fisher_closed_form(LinearRegression(), GaussianCovariate(alpha), np.ones(3))
        np.testing.assert_allclose(I_T, np.eye(3) + np.outer(alpha, alpha))

    def test_linear_shifted_sphere(self):
        shift = np.array([0.0, 1.5])
        I = fisher_closed_form(LinearRegression(), SphereShifted(2, shift), [1.0, 0.0])
        np.testing.assert_allclose(I, np.eye(2) + np.outer(shift, shift))

    def test_linear_ball(self):
        I = fisher_closed_form(LinearRegression(), BallUniform(4, 2.0), np.zeros(4))
        np.testing.assert_allclose(I, 4.0 / 6.0 * np.eye(4))

    def test_phase_sphere_d6(self):
        I = fisher_closed_form(PhaseRetrieval(), SphereShifted(6), _e(6, 0))
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(I)), [3, 3, 3, 3, 3, 9])
        assert I[0, 0] == pytest.approx(9.0)

    def test_phase_scales_with_beta_norm(self):
        I = fisher_closed_form(PhaseRetrieval(), SphereShifted(6), 2.0 * _e(6, 0))
        assert I[0, 0] == pytest.approx(36.0)
        assert I[1, 1] == pytest.approx(12.0)

    def test_phase_shift_direction(self):
        I = fisher_closed_form(PhaseRetrieval(), SphereShifted(6, 2.0 * _e(6, 1)), _e(6, 0))
        assert I[1, 1] == pytest.approx(3.0 + 4.0 * 4.0)
        assert I[2, 2] == pytest.approx(3.0)

    def test_phase_zero_beta(self):
        I = fisher_closed_form(PhaseRetrieval(), SphereShifted(3), np.zeros(3))
        np.testing.assert_array_equal(I, np.zeros((3, 3)))

    def test_phase_oblique_shift_unsupported(self):
        with pytest.raises(Unsupported):
            fisher_closed_form(PhaseRetrieval(), SphereShifted(3, [1.0, 1.0, 0.0]), _e(3, 0))

    def test_phase_gaussian_unsupported(self):
        with pytest.raises(Unsupported):
            fisher_closed_form(PhaseRetrieval(), GaussianCovariate([0.0, 0.0]), _e(2, 0))

    def test_logistic_unsupported(self):
        with pytest.raises(Unsupported):
            fisher_closed_form(LogisticRegression(), SphereShifted(3), _e(3, 0))

    def test_fisher_matrix_needs_rng_for_monte_carlo(self):
        with pytest.raises(Unsupported):
            fisher_matrix(LogisticRegression(), SphereShifted(3), _e(3, 0))
        I = fisher_matrix(LogisticRegression(), SphereShifted(3), _e(3, 0), m=5000,
                          rng=np.random.default_rng(0))
        assert I.shape == (3, 3)


class TestMonteCarlo:
    """Monte Carlo Fisher 测试"""

    def test_minimum_m(self):
        with pytest.raises(InvalidArgument):
            fisher_monte_carlo(LinearRegression(), SphereShifted(2), _e(2, 0), 999,
                               np.random.default_rng(0))

    def test_linear_gaussian_matches_closed(self):
        dist = GaussianCovariate([1.0, -0.5, 0.0])
        mean, se = fisher_monte_carlo(LinearRegression(), dist, np.ones(3), 200_000,
                                      np.random.default_rng(1))
        closed = fisher_closed_form(LinearRegression(), dist, np.ones(3))
        assert np.all(np.abs(mean - closed) <= 4 * se + 1e-12)

    def test_phase_d6_matches_closed(self):
        beta_star = _e(6, 0)
        mean, se = fisher_monte_carlo(PhaseRetrieval(), SphereShifted(6), beta_star, 200_000,
                                      np.random.default_rng(2))
        closed = fisher_closed_form(PhaseRetrieval(), SphereShifted(6), beta_star)
        assert np.all(np.abs(mean - closed) <= 4 * se)

    def test_phase_shifted_matches_closed(self):
        beta_star = _e(4, 0)
        dist = SphereShifted(4, 1.5 * _e(4, 2))
        mean, se = fisher_monte_carlo(PhaseRetrieval(), dist, beta_star, 200_000,
                                      np.random.default_rng(3))
        closed = fisher_closed_form(PhaseRetrieval(), dist, beta_star)
        assert np.all(np.abs(mean - closed) <= 4 * se)

    def test_result_symmetric(self):
        mean, _ = fisher_monte_carlo(LogisticRegression(), GaussianCovariate([0.5, 0.0]),
                                     [1.0, 1.0], 10_000, np.random.default_rng(4))
        np.testing.assert_array_equal(mean, mean.T)

    def test_chunking_is_deterministic(self):
        args = (LogisticRegression(), SphereShifted(3), _e(3, 0), 120_000)
        a, _ = fisher_monte_carlo(*args, np.random.default_rng(5))
        b, _ = fisher_monte_carlo(*args, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_logistic_eigenvector_along_beta(self):
        d = 8
        beta_star = np.ones(d) / np.sqrt(d)
        mean, _ = fisher_monte_carlo(LogisticRegression(), SphereShifted(d), beta_star, 200_000,
                                     np.random.default_rng(10))

        eig, vec = np.linalg.eigh(mean)

        # 最小特征值对应 β* 方向 (λ1 < λ2)
        assert abs(vec[:, 0] @ beta_star) >= 0.99
        assert eig[0] < eig[1]


class TestSphereEigs:
    """球面特征值测试"""

    def test_phase_closed_form(self):
        eigs = sphere_phase_eigs(6)
        assert (eigs.lambda1, eigs.lambda2, eigs.lambda3) == pytest.approx((9.0, 3.0, 4.0))

    def test_phase_needs_d2(self):
        with pytest.raises(InvalidArgument):
            sphere_phase_eigs(1)

    def test_logistic_matches_full_monte_carlo(self):
        d = 3
        eigs = sphere_logistic_eigs(d, m=10 ** 6, rng=np.random.default_rng(6))
        mean, se = fisher_monte_carlo(LogisticRegression(), SphereShifted(d), _e(d, 0), 400_000,
                                      np.random.default_rng(7))
        l1_se, l2_se, _ = eigs.standard_errors
        assert mean[0, 0] == pytest.approx(eigs.lambda1, abs=4 * np.hypot(se[0, 0], l1_se))
        assert mean[1, 1] == pytest.approx(eigs.lambda2, abs=4 * np.hypot(se[1, 1], l2_se))

    def test_logistic_ordering(self):
        # x1² 与 σ'(x1) 负相关: λ1 < λ3 < λ2
        eigs = sphere_logistic_eigs(3, m=200_000, rng=np.random.default_rng(8))
        assert 0 < eigs.lambda1 < eigs.lambda3 < eigs.lambda2
        assert eigs.lambda3 <= 0.25

    def test_logistic_large_d_matches_quadrature(self):
        # d → ∞ 时 x1 → N(0,1)，λ3 → E[σ'(z)]
        nodes, weights = hermegauss(80)
        p = expit(nodes)
        oracle = float(weights @ (p * (1.0 - p)) / np.sqrt(2.0 * np.pi))

        eigs = sphere_logistic_eigs(400, m=10 ** 6, rng=np.random.default_rng(11))

        assert eigs.lambda3 == pytest.approx(oracle, abs=4 * eigs.standard_errors[2] + 5e-4)

    @pytest.mark.parametrize("d", [20, 50, 200])
    def test_logistic_eigs_bounded_in_d(self, d):
        eigs = sphere_logistic_eigs(d, m=200_000, rng=np.random.default_rng(d))
        for value in (eigs.lambda1, eigs.lambda2, eigs.lambda3):
            assert 0.1 < value < 0.25

    def test_logistic_records_r(self):
        a = sphere_logistic_eigs(3, r=2.0, m=10_000, rng=np.random.default_rng(9))
        b = sphere_logistic_eigs(3, r=0.0, m=10_000, rng=np.random.default_rng(9))
        assert a.r == 2.0
        assert a.lambda1 == b.lambda1


class TestTransfer:
    """迹泛函测试"""

    def test_identity_pair(self):
        pair = FisherPair(np.eye(4), np.eye(4))
        assert transfer_trace(pair) == pytest.approx(4.0)
        assert transfer_norm(pair) == pytest.approx(1.0)

    def test_linear_gaussian_trace(self):
        alpha = np.array([2.0, 0.0, 0.0, 0.0, 0.0])
        pair = fisher_pair(LinearRegression(), GaussianCovariate(np.zeros(5)),
                           GaussianCovariate(alpha), np.ones(5))
        assert transfer_trace(pair) == pytest.approx(linear_transfer_trace(alpha, 1.0))
        assert linear_transfer_trace(alpha, 1.0) == pytest.approx(9.0)
        assert transfer_norm(pair) == pytest.approx(5.0)

    def test_sphere_trace_and_norm(self):
        d, r = 5, 1.5
        eigs = sphere_phase_eigs(d, r=r)
        u, v = _e(d, 0), _e(d, 1)
        pair = FisherPair(eigs.source_matrix(u), eigs.target_matrix(u, v))
        assert transfer_trace(pair) == pytest.approx(sphere_transfer_trace(eigs))
        assert transfer_norm(pair) == pytest.approx(sphere_transfer_norm(eigs))
        assert sphere_transfer_trace(eigs, d=d, r=0.0) == pytest.approx(d)

    def test_singular_source(self):
        pair = FisherPair(np.diag([1.0, 0.0]), np.eye(2))
        with pytest.raises(SingularSource):
            transfer_trace(pair)


class TestWeightedInformation:
    """加权信息对测试"""

    def test_ball_construction_trace(self):
        # Tr(G_w H_w⁻¹) = W·d
        pair = ball_pair(8.0, 3)
        weighted = weighted_information(LinearRegression(), pair, np.array([1.0, 0.0, 0.0]),
                                        400_000, np.random.default_rng(10))
        assert weighted.trace == pytest.approx(24.0, abs=4 * weighted.trace_se)
        assert weighted.trace_se > 0

    def test_mwle_trace_exceeds_mle_trace(self):
        shift = ShiftPair(BallUniform(3, 2.0), BallUniform(3, 1.0))
        beta_star = np.array([1.0, -1.0, 0.5])
        weighted = weighted_information(LinearRegression(), shift, beta_star, 200_000,
                                        np.random.default_rng(11))
        pair = fisher_pair(LinearRegression(), shift.source, shift.target, beta_star)
        assert transfer_trace(pair) == pytest.approx(0.75)
        assert weighted.trace >= transfer_trace(pair) - 4 * weighted.trace_se

    def test_no_shift_reduces_to_fisher(self):
        dist = GaussianCovariate(np.zeros(2))
        weighted = weighted_information(LinearRegression(), ShiftPair(dist, dist), [1.0, 0.0],
                                        200_000, np.random.default_rng(12))
        assert weighted.trace == pytest.approx(2.0, abs=4 * weighted.trace_se)


class TestThresholds:
    """样本量门槛测试"""

    def test_identity_gives_8d(self):
        for d in (1, 3, 7):
            pair = FisherPair(np.eye(d), np.eye(d))
            assert sample_size_threshold(1.0, 1.0, 1.0, 0.0, pair) == pytest.approx(8 * d)

    def test_linear_no_shift_gives_4d(self):
        d = 5
        c = assumption_constants(ModelKind.LINEAR, d)
        pair = FisherPair(np.eye(d), np.eye(d))
        assert sample_size_threshold(c.B1, c.B2, c.B3, c.gamma, pair) == pytest.approx(4 * d)
        assert linear_threshold(np.zeros(d), 1.0) == pytest.approx(4 * d)

    def test_threshold_grows_with_shift(self):
        d = 3
        c = assumption_constants("linear", d)
        base = FisherPair(np.eye(d), np.eye(d))
        shifted = FisherPair(np.eye(d), np.eye(d) + 4.0 * np.outer(_e(d, 0), _e(d, 0)))
        assert sample_size_threshold(c.B1, c.B2, c.B3, c.gamma, shifted) > \
            sample_size_threshold(c.B1, c.B2, c.B3, c.gamma, base)

    def test_weighted_identity(self):
        d = 4
        pair = WeightedPair(np.eye(d), np.eye(d))
        assert weighted_sample_size_threshold(1.0, 1.0, 1.0, 0.0, 1.0, pair) == pytest.approx(d)
        assert weighted_sample_size_threshold(1.0, 1.0, 1.0, 0.0, 2.0, pair) == pytest.approx(4 * d)

    def test_assumption_constants(self):
        lin = assumption_constants("linear", 4)
        assert (lin.gamma, lin.B1, lin.B2, lin.B3) == (1.0, 2.0, 2.0, 0.0)
        logi = assumption_constants("logistic", 4, r=1.0)
        assert logi.gamma == 0.0
        assert logi.B3 == pytest.approx(27.0)
        assert logi.L_S == pytest.approx(8.0)
        ph = assumption_constants("phase", 4, r=1.0)
        assert ph.gamma == 0.5
        assert ph.B1 == pytest.approx(9.0)
        assert ph.B2 == pytest.approx(81.0)

    def test_closed_threshold_formulas(self):
        assert logistic_threshold(2, 1.0) == pytest.approx(32.0)
        assert phase_threshold(2, 1.0) == pytest.approx(512.0)
        assert linear_threshold([2.0, 0.0], 1.0) == pytest.approx(2 * (1 + (8 + 2) / (4 + 2)) ** 2)


# 运行测试
if __name__ == "__main__":
    pytest.main([__file__, "-v"])
