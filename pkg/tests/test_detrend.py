import numpy as np
import pytest

from vrcoint.detrend import (
    Case,
    DetrendMode,
    deterministic_regressors,
    detrend,
    gls_detrend,
    ols_detrend,
)
from vrcoint.exceptions import InvalidCaseError, PureDifferencingWarning


class TestDeterministicRegressors:
    def test_d1(self):
        np.testing.assert_array_equal(deterministic_regressors(Case.D1, 3), [[1], [1], [1]])

    def test_d2(self):
        d = deterministic_regressors(Case.D2, 3)
        np.testing.assert_array_equal(d, [[1, 1], [1, 2], [1, 3]])

    def test_d0_empty(self):
        assert deterministic_regressors(Case.D0, 5).shape == (5, 0)


class TestOlsDetrend:
    def test_constant_column_removed(self):
        out = ols_detrend(np.full((4, 1), 5.0), Case.D1)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_exact_trend_removed(self):
        t = np.arange(1, 9, dtype=float)
        out = ols_detrend((2.0 + 3.0 * t)[:, None], Case.D2)
        np.testing.assert_allclose(out, 0.0, atol=1e-10)

    def test_mean_removal_values(self):
        out = ols_detrend(np.array([1.0, 2.0, 4.0, 8.0])[:, None], Case.D1)
        np.testing.assert_allclose(out.ravel(), [-2.75, -1.75, 0.25, 4.25])

    def test_d0_identity(self):
        z = np.random.default_rng(0).standard_normal((10, 2))
        np.testing.assert_array_equal(ols_detrend(z, Case.D0), z)

    def test_orthogonality_and_idempotence(self):
        rng = np.random.default_rng(5)
        for case in (Case.D1, Case.D2):
            z = rng.standard_normal((40, 3)).cumsum(axis=0)
            out = ols_detrend(z, case)
            d = deterministic_regressors(case, 40)
            scale = max(1.0, np.abs(z).max())
            assert np.abs(d.T @ out).max() <= 1e-8 * scale
            np.testing.assert_allclose(ols_detrend(out, case), out, atol=1e-10)

    def test_deterministic_shift_invariance(self):
        rng = np.random.default_rng(6)
        z = rng.standard_normal((30, 2)).cumsum(axis=0)
        gamma = np.array([[4.0, -1.0], [0.5, 2.0]])
        d = deterministic_regressors(Case.D2, 30)
        np.testing.assert_allclose(
            ols_detrend(z + d @ gamma, Case.D2), ols_detrend(z, Case.D2), atol=1e-9
        )

    def test_d1_closed_form(self):
        rng = np.random.default_rng(7)
        z = rng.standard_normal((25, 2))
        np.testing.assert_allclose(ols_detrend(z, Case.D1), z - z.mean(axis=0), atol=1e-12)

    def test_d2_closed_form(self):
        # two-term weight formula against the projection implementation
        rng = np.random.default_rng(8)
        T = 31
        z = rng.standard_normal((T, 1)).cumsum(axis=0)
        t = np.arange(1, T + 1, dtype=float)[:, None]
        mean_z = z.mean(axis=0)
        slope_z = ((np.arange(1, T + 1) / T)[:, None] * z).sum(axis=0)
        closed = (
            z
            - (4 * T - 6 * t + 2) / (T - 1) * mean_z
            - (-6 * T + 12 * t - 6) / ((T - 1) * (T + 1)) * slope_z
        )
        np.testing.assert_allclose(ols_detrend(z, Case.D2), closed, atol=1e-9)


class TestGlsDetrend:
    def test_rho_zero_matches_ols(self):
        # c_bar = -T makes rho_bar = 0: quasi-differencing leaves the levels.
        rng = np.random.default_rng(9)
        z = rng.standard_normal((12, 2)).cumsum(axis=0)
        for case in (Case.D1, Case.D2):
            np.testing.assert_allclose(
                gls_detrend(z, case, c_bar=-12.0), ols_detrend(z, case), atol=1e-9
            )

    def test_pure_deterministic_annihilated(self):
        t = np.arange(1, 21, dtype=float)
        y = 3.0 - 0.5 * t
        out = gls_detrend(y[:, None], Case.D2, c_bar=-13.5)
        np.testing.assert_allclose(out, 0.0, atol=1e-9)

    def test_hand_built_quasi_difference_oracle(self):
        # independent two-step oracle: build the quasi-differenced stacks
        # explicitly and solve the single-parameter least squares by hand
        z = np.array([1.0, 2.0, 3.0, 4.0])
        c_bar, T = -40.25, 4
        rho = 1.0 + c_bar / T
        d_q = [1.0] + [1.0 - rho] * 3
        z_q = [z[0]] + [z[t] - rho * z[t - 1] for t in range(1, 4)]
        tau = sum(a * b for a, b in zip(d_q, z_q)) / sum(a * a for a in d_q)
        expected = z - tau
        out = gls_detrend(z[:, None], Case.D1, c_bar=c_bar)
        np.testing.assert_allclose(out.ravel(), expected, atol=1e-12)

    def test_deterministic_shift_invariance(self):
        rng = np.random.default_rng(10)
        z = rng.standard_normal((30, 2)).cumsum(axis=0)
        d = deterministic_regressors(Case.D2, 30)
        gamma = np.array([[1.5, -2.0], [0.25, 1.0]])
        np.testing.assert_allclose(
            gls_detrend(z + d @ gamma, Case.D2, -48.25),
            gls_detrend(z, Case.D2, -48.25),
            atol=1e-9,
        )

    def test_d0_invalid(self):
        with pytest.raises(InvalidCaseError):
            gls_detrend(np.ones((10, 1)), Case.D0, -10.0)

    def test_cbar_zero_warns(self):
        z = np.random.default_rng(1).standard_normal((10, 1)).cumsum(axis=0)
        with pytest.warns(PureDifferencingWarning):
            gls_detrend(z, Case.D1, 0.0)


class TestDetrendMode:
    def test_gls_requires_cbar(self):
        with pytest.raises(ValueError):
            DetrendMode("gls")
        with pytest.raises(ValueError):
            DetrendMode.gls(1.0)

    def test_dispatch(self):
        z = np.random.default_rng(2).standard_normal((15, 2)).cumsum(axis=0)
        np.testing.assert_array_equal(detrend(z, Case.D1, DetrendMode.ols()),
                                      ols_detrend(z, Case.D1))
        np.testing.assert_array_equal(detrend(z, Case.D1, DetrendMode.gls(-7.0)),
                                      gls_detrend(z, Case.D1, -7.0))
