import math

import numpy as np
import pytest
from oracles import adf_oracle, criterion_oracle, msb_oracle, vr_oracle, zalpha_oracle

from vrcoint.core import RngStream
from vrcoint.detrend import Case, DetrendMode, deterministic_regressors
from vrcoint.exceptions import (
    DegenerateResidualsError,
    InvalidCaseError,
    NearSingularARSumError,
    NonpositiveLongRunVarianceWarning,
)
from vrcoint.statistics import (
    Criterion,
    KernelSpec,
    TestKind,
    adf_statistic,
    andrews_bandwidth,
    bartlett_kernel,
    criterion_values,
    default_pmax,
    msb_statistic,
    qs_kernel,
    run_test,
    select_lag,
    vr_statistic,
    zalpha_statistic,
)


def seed42_walk(T=50):
    return RngStream(42).generator().standard_normal(T).cumsum()


class TestVrStatistic:
    def test_alternating_exact(self):
        assert vr_statistic(np.array([1.0, -1.0, 1.0, -1.0])) == pytest.approx(0.03125, abs=0)

    def test_matches_loop_oracle(self):
        u = seed42_walk(40)
        assert vr_statistic(u) == pytest.approx(vr_oracle(u), rel=1e-12)

    def test_scale_and_sign_invariance(self):
        u = seed42_walk(30)
        base = vr_statistic(u)
        assert vr_statistic(5.5 * u) == pytest.approx(base, rel=1e-12)
        assert vr_statistic(-u) == pytest.approx(base, rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateResidualsError):
            vr_statistic(np.zeros(10))


class TestAdfStatistic:
    def test_random_walk_p0_matches_oracle(self):
        u = seed42_walk(80)
        assert adf_statistic(u, 0) == pytest.approx(adf_oracle(u, 0), rel=1e-10)

    def test_ramp_p0_matches_oracle(self):
        u = np.arange(1.0, 41.0)
        assert adf_statistic(u, 0) == pytest.approx(adf_oracle(u, 0), rel=1e-10)

    def test_higher_lags_match_oracle(self):
        u = seed42_walk(100)
        for p in (1, 2, 5):
            assert adf_statistic(u, p) == pytest.approx(adf_oracle(u, p), rel=1e-9)


class TestMsbStatistic:
    def test_p0_matches_oracle(self):
        u = seed42_walk(80)
        assert msb_statistic(u, 0) == pytest.approx(msb_oracle(u, 0), rel=1e-10)

    def test_scale_invariance(self):
        u = seed42_walk(60)
        assert msb_statistic(4.0 * u, 2) == pytest.approx(msb_statistic(u, 2), rel=1e-10)

    def test_near_singular_ar_sum(self):
        # ramp with one lag: dy is constant, fitted exactly by pi = 1, b0 = 0,
        # so the 1/(1 - pi(1))^2 normalization is unidentified
        with pytest.raises(NearSingularARSumError):
            msb_statistic(np.arange(1.0, 31.0), 1)


class TestQsKernel:
    def test_normalization(self):
        assert qs_kernel(0.0) == 1.0

    def test_symmetry(self):
        x = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(qs_kernel(x), qs_kernel(-x), rtol=1e-12)

    def test_five_sixths(self):
        # sin(pi)/pi - cos(pi) = 1, prefactor 25/(12 pi^2 (5/6)^2) = 3/pi^2
        assert qs_kernel(5.0 / 6.0) == pytest.approx(3.0 / math.pi**2, rel=1e-12)

    def test_bartlett(self):
        assert bartlett_kernel(0.0) == 1.0
        assert bartlett_kernel(0.25) == pytest.approx(0.75)
        assert bartlett_kernel(1.5) == 0.0


class TestAndrewsBandwidth:
    def test_rho_half_qs(self):
        # k = (1, 1, 0, ..., 0) has AR(1) fit exactly 0.5
        k = np.zeros(100)
        k[0] = k[1] = 1.0
        expected = 1.3221 * (16.0 * 100) ** 0.2  # alpha(2) = 4*.25/.5^4 = 16
        assert andrews_bandwidth(k, KernelSpec("qs")) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(5.7821, abs=5e-4)

    def test_rho_half_bartlett(self):
        k = np.zeros(100)
        k[0] = k[1] = 1.0
        alpha1 = 4.0 * 0.25 / (0.25 * 2.25)
        expected = 1.1447 * (alpha1 * 100) ** (1.0 / 3.0)
        assert andrews_bandwidth(k, KernelSpec("bartlett")) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(6.4365, abs=5e-4)

    def test_white_noise_floor(self):
        k = np.zeros(50)
        k[0] = 1.0  # rho_hat = 0 exactly
        assert andrews_bandwidth(k, KernelSpec("qs")) == 0.0


class TestZalpha:
    def test_zero_bandwidth_collapse(self):
        u = seed42_walk(60)
        value, info = zalpha_statistic(u, KernelSpec("qs", bandwidth=0.0))
        den = np.sum(u[:-1] ** 2)
        alpha = np.sum(u[1:] * u[:-1]) / den
        assert value == pytest.approx((len(u) - 1) * (alpha - 1.0), rel=1e-12)
        assert info["nonpositive_lrv"] is False

    def test_fixed_bandwidth_matches_oracle(self):
        u = seed42_walk(70)
        value, _ = zalpha_statistic(u, KernelSpec("qs", bandwidth=4.0))
        assert value == pytest.approx(zalpha_oracle(u, 4.0), rel=1e-10)

    def test_scale_invariance(self):
        u = seed42_walk(50)
        a, _ = zalpha_statistic(u)
        b, _ = zalpha_statistic(-3.0 * u)
        assert b == pytest.approx(a, rel=1e-10)

    def test_nonpositive_lrv_warns_not_raises(self):
        # alternating series: strong negative autocorrelation drives the
        # QS-weighted long-run variance negative in small samples
        u = np.array([1.0, -1.0] * 8)
        with pytest.warns(NonpositiveLongRunVarianceWarning):
            value, info = zalpha_statistic(u, KernelSpec("qs", bandwidth=3.0))
        assert info["nonpositive_lrv"] is True
        assert np.isfinite(value)


class TestLagSelection:
    def test_pmax_zero(self):
        u = seed42_walk(30)
        for crit in Criterion:
            assert select_lag(u, crit, 0).chosen_p == 0

    def test_values_match_oracle_seed42(self):
        u = seed42_walk(50)
        p_max = 4
        for crit in Criterion:
            values = criterion_values(u, crit, p_max)
            expected = [criterion_oracle(u, p, p_max, crit.value) for p in range(p_max + 1)]
            np.testing.assert_allclose(values, expected, rtol=1e-10)

    def test_white_noise_prefers_zero_lags(self):
        picks = []
        for rep in range(500):
            u = RngStream(7, rep).generator().standard_normal(80)
            picks.append(select_lag(u, Criterion.AIC, 4).chosen_p)
        assert np.mean(np.array(picks) == 0) >= 0.6

    def test_default_pmax(self):
        assert default_pmax(100) == 12
        assert default_pmax(250) == 15
        assert default_pmax(16) == 7


class TestRunTest:
    @staticmethod
    def sample(seed=3, T=120):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(T).cumsum()
        y = 1.5 * x + rng.standard_normal(T).cumsum()
        return y, x

    def test_scale_invariance_all_kinds(self):
        y, x = self.sample()
        for kind in TestKind:
            base = run_test(y, x, Case.D1, DetrendMode.ols(), kind)
            scaled = run_test(2.0 * y, x, Case.D1, DetrendMode.ols(), kind)
            assert scaled.value == pytest.approx(base.value, rel=1e-10)

    def test_deterministic_invariance(self):
        y, x = self.sample(4)
        d = deterministic_regressors(Case.D2, len(y))
        gamma = np.array([3.0, -0.25])
        for mode in (DetrendMode.ols(), DetrendMode.gls(-48.25)):
            for kind in (TestKind.VR, TestKind.ADF, TestKind.MSB):
                base = run_test(y, x, Case.D2, mode, kind)
                shifted = run_test(y + d @ gamma, x, Case.D2, mode, kind)
                assert shifted.value == pytest.approx(base.value, rel=1e-8)

    def test_exact_cointegration_degenerate(self):
        y, x = self.sample(5)
        with pytest.raises(DegenerateResidualsError):
            run_test(2.0 * x, x, Case.D0, DetrendMode.ols(), TestKind.VR)

    def test_zalpha_gls_invalid(self):
        y, x = self.sample(6)
        with pytest.raises(InvalidCaseError):
            run_test(y, x, Case.D1, DetrendMode.gls(-40.25), TestKind.ZALPHA)

    def test_adf_msb_share_auxiliary_regression(self):
        y, x = self.sample(7)
        adf = run_test(y, x, Case.D1, DetrendMode.ols(), TestKind.ADF, criterion=Criterion.AIC)
        msb = run_test(y, x, Case.D1, DetrendMode.ols(), TestKind.MSB, criterion=Criterion.AIC)
        assert adf.settings["p"] == msb.settings["p"]
        from vrcoint.residuals import cointegrating_residuals

        u = cointegrating_residuals(y, x, Case.D1, DetrendMode.ols()).u_hat
        p = adf.settings["p"]
        assert adf.value == pytest.approx(adf_oracle(u, p), rel=1e-8)
        assert msb.value == pytest.approx(msb_oracle(u, p), rel=1e-8)

    def test_modified_criterion_uses_ols_residuals_for_lags(self):
        y, x = self.sample(8)
        from vrcoint.residuals import cointegrating_residuals

        gls = DetrendMode.gls(-40.25)
        stat = run_test(y, x, Case.D1, gls, TestKind.ADF, criterion=Criterion.MAIC)
        u_ols = cointegrating_residuals(y, x, Case.D1, DetrendMode.ols()).u_hat
        u_gls = cointegrating_residuals(y, x, Case.D1, gls).u_hat
        expected_p = select_lag(u_ols, Criterion.MAIC, default_pmax(len(y))).chosen_p
        assert stat.settings["p"] == expected_p
        assert stat.value == pytest.approx(adf_oracle(u_gls, expected_p), rel=1e-8)

    def test_settings_echo(self):
        y, x = self.sample(9)
        stat = run_test(y, x, Case.D2, DetrendMode.ols(), TestKind.ZALPHA,
                        kernel=KernelSpec("qs", "andrews"))
        for key in ("case", "detrend", "m", "T", "kernel", "bandwidth"):
            assert key in stat.settings
