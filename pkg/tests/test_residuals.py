import numpy as np
import pytest

from vrcoint.detrend import Case, DetrendMode
from vrcoint.exceptions import RankDeficientError, SampleTooSmallError
from vrcoint.residuals import cointegrating_residuals


def random_sample(seed, T=60, m=2):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((T, m)).cumsum(axis=0)
    y = X @ np.arange(1.0, m + 1.0) + rng.standard_normal(T).cumsum()
    return y, X


class TestCointegratingResiduals:
    def test_exact_cointegration(self):
        y, X = random_sample(0)
        y_exact = X @ np.array([1.0, 2.0])
        for case in (Case.D0, Case.D1, Case.D2):
            res = cointegrating_residuals(y_exact, X, case, DetrendMode.ols())
            np.testing.assert_allclose(res.u_hat, 0.0, atol=1e-8)
            np.testing.assert_allclose(res.beta_hat, [1.0, 2.0], atol=1e-8)

    def test_single_regressor_closed_form(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        x = np.array([1.0, 1.0, 2.0, 2.0])
        res = cointegrating_residuals(y, x, Case.D0, DetrendMode.ols())
        # no-intercept ratio formula: sum(x*y)/sum(x*x) = 17/10
        beta = float(np.sum(x * y) / np.sum(x * x))
        assert beta == pytest.approx(1.7)
        assert res.beta_hat[0] == pytest.approx(beta)
        np.testing.assert_allclose(res.u_hat, y - beta * x)

    def test_shift_invariance_d1(self):
        y, X = random_sample(1)
        base = cointegrating_residuals(y, X, Case.D1, DetrendMode.ols())
        shifted = cointegrating_residuals(y + 17.5, X, Case.D1, DetrendMode.ols())
        np.testing.assert_allclose(base.u_hat, shifted.u_hat, atol=1e-9)

    def test_orthogonality(self):
        y, X = random_sample(2)
        for mode in (DetrendMode.ols(), DetrendMode.gls(-40.25)):
            for case in (Case.D1, Case.D2):
                res = cointegrating_residuals(y, X, case, mode)
                from vrcoint.detrend import detrend

                x_tilde = detrend(np.column_stack([y, X]), case, mode)[:, 1:]
                scale = max(1.0, np.abs(x_tilde).max())
                assert np.abs(x_tilde.T @ res.u_hat).max() <= 1e-8 * scale

    def test_scale_equivariance(self):
        y, X = random_sample(3)
        base = cointegrating_residuals(y, X, Case.D1, DetrendMode.ols())
        scaled_y = cointegrating_residuals(3.0 * y, X, Case.D1, DetrendMode.ols())
        np.testing.assert_allclose(scaled_y.u_hat, 3.0 * base.u_hat, rtol=1e-10)
        np.testing.assert_allclose(scaled_y.beta_hat, 3.0 * base.beta_hat, rtol=1e-10)
        scaled_x = cointegrating_residuals(y, 2.0 * X, Case.D1, DetrendMode.ols())
        np.testing.assert_allclose(scaled_x.beta_hat, base.beta_hat / 2.0, rtol=1e-10)
        np.testing.assert_allclose(scaled_x.u_hat, base.u_hat, atol=1e-10)

    def test_collinear_regressors_raise(self):
        y, X = random_sample(4)
        X2 = np.column_stack([X[:, 0], X[:, 0]])
        with pytest.raises(RankDeficientError):
            cointegrating_residuals(y, X2, Case.D1, DetrendMode.ols())

    def test_sample_too_small(self):
        with pytest.raises(SampleTooSmallError):
            cointegrating_residuals(np.ones(4), np.ones((4, 1)), Case.D2, DetrendMode.ols())
