import numpy as np
import pytest

from vrcoint.core import RngStream
from vrcoint.detrend import Case
from vrcoint.dgp import DgpConfig, ShortRunDynamics, generate_sample, large_u0, longrun_covariance
from vrcoint.exceptions import InvalidConfigError, UnitRhoError


class TestShortRunDynamics:
    def test_parse_round_trip(self):
        for text, expected in [
            ("iid", ShortRunDynamics.iid()),
            ("ar(0.6)", ShortRunDynamics.ar(0.6)),
            ("ma(0.9)", ShortRunDynamics.ma(0.9)),
            ("arma(0.3,0.6)", ShortRunDynamics.arma(0.3, 0.6)),
            ("garch(0.05,0.94)", ShortRunDynamics.garch(0.05, 0.94)),
        ]:
            assert ShortRunDynamics.parse(text) == expected
            assert ShortRunDynamics.parse(expected.label()) == expected

    def test_invariants(self):
        with pytest.raises(InvalidConfigError):
            ShortRunDynamics.ar(1.0)
        with pytest.raises(InvalidConfigError):
            ShortRunDynamics.ma(-1.2)
        with pytest.raises(InvalidConfigError):
            ShortRunDynamics.garch(0.5, 0.5)


class TestLargeU0:
    def test_zero_lambda(self):
        assert large_u0(0.0, 0.8, "large_fixed") == 0.0

    def test_fixed_formula(self):
        assert large_u0(1.0, 0.8, "large_fixed") == pytest.approx(1.0 / 0.6)

    def test_random_std(self):
        draws = [
            large_u0(1.0, 0.8, "large_random", RngStream(5, i)) for i in range(30000)
        ]
        assert np.std(draws) == pytest.approx(1.0 / 0.6, rel=0.02)

    def test_unit_rho(self):
        with pytest.raises(UnitRhoError):
            large_u0(1.0, 1.0, "large_fixed")


class TestLongrunCovariance:
    def test_iid(self):
        om = longrun_covariance(ShortRunDynamics.iid(), 0.5)
        np.testing.assert_allclose(om, [[1.0, 0.5], [0.5, 1.0]])
        assert om[0, 1] ** 2 / (om[0, 0] * om[1, 1]) == pytest.approx(0.25)

    def test_arma_formula(self):
        s = np.sqrt(0.4)
        om = longrun_covariance(ShortRunDynamics.arma(0.3, 0.6), s)
        assert om[0, 0] == pytest.approx((0.4 / 0.7) ** 2)
        assert om[0, 1] == pytest.approx(0.4 * s / 0.7)

    def test_ma_degenerate_correlation(self):
        om = longrun_covariance(ShortRunDynamics.ma(0.9), 0.0)
        np.testing.assert_allclose(om, np.diag([0.01, 1.0]))

    def test_implied_r2_identity(self):
        # squared long-run correlation equals sigma_ev^2 for every dynamics
        dynamics = [
            ShortRunDynamics.iid(),
            ShortRunDynamics.ar(0.6),
            ShortRunDynamics.ma(0.9),
            ShortRunDynamics.arma(0.6, 0.3),
            ShortRunDynamics.garch(0.05, 0.94),
        ]
        for dyn in dynamics:
            for r2 in (0.0, 0.4, 0.8):
                s = np.sqrt(r2)
                om = longrun_covariance(dyn, s)
                implied = om[0, 1] ** 2 / (om[0, 0] * om[1, 1])
                assert implied == pytest.approx(r2, abs=1e-12)


class TestGenerateSample:
    def test_reproducible(self):
        cfg = DgpConfig(T=50, case=Case.D1, dynamics=ShortRunDynamics.ar(0.6), rho=1.0)
        y1, x1 = generate_sample(cfg, RngStream(3, 9))
        y2, x2 = generate_sample(cfg, RngStream(3, 9))
        np.testing.assert_array_equal(y1, y2)
        np.testing.assert_array_equal(x1, x2)

    def test_zero_r2_independence(self):
        cfg = DgpConfig(T=50, case=Case.D0, dynamics=ShortRunDynamics.iid(), r_squared=0.0)
        g = RngStream(1, 0).generator()
        from vrcoint.dgp import _innovations

        eps, v = _innovations(cfg, g, 100000)
        assert abs(np.corrcoef(eps, v)[0, 1]) < 0.01

    def test_r2_controls_covariance(self):
        cfg = DgpConfig(T=50, case=Case.D0, dynamics=ShortRunDynamics.iid(), r_squared=0.4)
        from vrcoint.dgp import _innovations

        eps, v = _innovations(cfg, RngStream(2, 0).generator(), 200000)
        assert np.mean(eps * v) == pytest.approx(np.sqrt(0.4), abs=0.01)

    def test_random_walk_variance(self):
        # under rho = 1 with iid innovations the error is a random walk that
        # starts from zero at the head of the burn-in, so Var(u_T) = T + burn_in
        cfg = DgpConfig(T=500, case=Case.D0, dynamics=ShortRunDynamics.iid(), rho=1.0)
        last = []
        for rep in range(2000):
            y, x = generate_sample(cfg, RngStream(7, rep))
            last.append(y[-1] - x[-1, 0])  # beta = 1 recovers u_T
        assert np.var(last) / (cfg.T + cfg.burn_in) == pytest.approx(1.0, rel=0.1)

    def test_garch_unit_variance(self):
        cfg = DgpConfig(T=60000, case=Case.D0, dynamics=ShortRunDynamics.garch(0.05, 0.94))
        from vrcoint.dgp import _innovations, _xi_series

        eps, _ = _innovations(cfg, RngStream(11, 0).generator(), 60000)
        xi = _xi_series(cfg, eps)
        assert np.var(xi) == pytest.approx(1.0, rel=0.1)

    def test_burn_in_sufficiency_ar09(self):
        # xi_1 variance after burn-in close to the stationary 1/(1 - 0.81)
        cfg = DgpConfig(T=5, case=Case.D0, dynamics=ShortRunDynamics.ar(0.9))
        from vrcoint.dgp import _innovations, _xi_series

        first = []
        for rep in range(10000):
            eps, _ = _innovations(cfg, RngStream(13, rep).generator(), cfg.burn_in + 1)
            first.append(_xi_series(cfg, eps)[-1])
        assert np.var(first) == pytest.approx(1.0 / (1.0 - 0.81), rel=0.05)

    def test_d2_regressor_drift(self):
        # (x_T - x_0 - mu T)/sqrt(T) has unit variance across replications
        cfg = DgpConfig(T=400, case=Case.D2, dynamics=ShortRunDynamics.iid())
        ends = []
        for rep in range(2000):
            _, x = generate_sample(cfg, RngStream(17, rep))
            ends.append((x[-1, 0] - 1.0 - 1.0 * cfg.T) / np.sqrt(cfg.T))
        assert np.var(ends) == pytest.approx(1.0, rel=0.1)

    def test_d0_starts_at_zero_drift_free(self):
        cfg = DgpConfig(T=200, case=Case.D0, dynamics=ShortRunDynamics.iid())
        _, x = generate_sample(cfg, RngStream(19, 0))
        # x_1 = v_1 only: no x0, no drift
        assert abs(x[0, 0]) < 5.0
        means = [generate_sample(cfg, RngStream(19, r))[1][-1, 0] for r in range(500)]
        assert abs(np.mean(means)) / np.sqrt(cfg.T) < 0.2

    def test_large_u0_rule(self):
        cfg = DgpConfig(
            T=100, case=Case.D2, dynamics=ShortRunDynamics.iid(),
            rho=0.8, u0_rule="large_fixed", lambda_u=1.0,
        )
        y, x = generate_sample(cfg, RngStream(23, 0))
        assert np.all(np.isfinite(y))

    def test_invalid_config(self):
        with pytest.raises(InvalidConfigError):
            DgpConfig(T=50, case=Case.D0, dynamics=ShortRunDynamics.iid(), r_squared=1.0)
        with pytest.raises(UnitRhoError):
            DgpConfig(
                T=50, case=Case.D0, dynamics=ShortRunDynamics.iid(),
                rho=1.0, u0_rule="large_fixed", lambda_u=1.0,
            )
