"""Finite-sample data generation for the size and power experiments.

A single stochastic regressor is generated as a random walk with optional
drift; the regression error follows a (near) unit-root autoregression whose
innovations come from one of five short-run dynamics (IID, AR, MA, ARMA,
GARCH). Innovation pairs are bivariate normal with unit variances, and the
cross covariance equals sqrt(r_squared), which makes the squared long-run
correlation between errors and regressors equal to r_squared for every
dynamics choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from vrcoint.core import RngStream
from vrcoint.detrend import Case
from vrcoint.exceptions import InvalidConfigError, UnitRhoError

BURN_IN = 100


@dataclass(frozen=True)
class ShortRunDynamics:
    """Innovation process for the regression error."""

    kind: str  # "iid" | "ar" | "ma" | "arma" | "garch"
    phi: float = 0.0
    theta: float = 0.0
    a1: float = 0.0
    a2: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("iid", "ar", "ma", "arma", "garch"):
            raise InvalidConfigError(f"unknown dynamics kind {self.kind!r}")
        if self.kind in ("ar", "arma") and not abs(self.phi) < 1:
            raise InvalidConfigError(f"|phi| must be < 1, got {self.phi}")
        if self.kind in ("ma", "arma") and not abs(self.theta) < 1:
            raise InvalidConfigError(f"|theta| must be < 1, got {self.theta}")
        if self.kind == "garch":
            if self.a1 < 0 or self.a2 < 0 or self.a1 + self.a2 >= 1:
                raise InvalidConfigError("GARCH needs a1, a2 >= 0 and a1 + a2 < 1")

    @classmethod
    def iid(cls) -> "ShortRunDynamics":
        return cls("iid")

    @classmethod
    def ar(cls, phi: float) -> "ShortRunDynamics":
        return cls("ar", phi=phi)

    @classmethod
    def ma(cls, theta: float) -> "ShortRunDynamics":
        return cls("ma", theta=theta)

    @classmethod
    def arma(cls, phi: float, theta: float) -> "ShortRunDynamics":
        return cls("arma", phi=phi, theta=theta)

    @classmethod
    def garch(cls, a1: float, a2: float) -> "ShortRunDynamics":
        return cls("garch", a1=a1, a2=a2)

    def label(self) -> str:
        if self.kind == "iid":
            return "iid"
        if self.kind == "ar":
            return f"ar({self.phi:g})"
        if self.kind == "ma":
            return f"ma({self.theta:g})"
        if self.kind == "arma":
            return f"arma({self.phi:g},{self.theta:g})"
        return f"garch({self.a1:g},{self.a2:g})"

    @classmethod
    def parse(cls, text: str) -> "ShortRunDynamics":
        """Parse labels like ``iid``, ``ar(0.6)``, ``arma(0.3,0.6)``, ``garch(0.05,0.94)``."""
        text = text.strip().lower()
        if text == "iid":
            return cls.iid()
        makers = {"arma": cls.arma, "garch": cls.garch, "ar": cls.ar, "ma": cls.ma}
        for prefix, maker in makers.items():
            if text.startswith(prefix + "(") and text.endswith(")"):
                args = [float(a) for a in text[len(prefix) + 1 : -1].split(",")]
                try:
                    return maker(*args)
                except TypeError:
                    raise InvalidConfigError(f"wrong parameter count in {text!r}") from None
        raise InvalidConfigError(f"cannot parse dynamics {text!r}")


# Deterministic parameters of the design, by case: (x0, mu, tau)
_CASE_PARAMS = {
    Case.D0: (0.0, 0.0, np.array([])),
    Case.D1: (1.0, 0.0, np.array([1.0])),
    Case.D2: (1.0, 1.0, np.array([1.0, 1.0])),
}


@dataclass(frozen=True)
class DgpConfig:
    """One cell of the simulation design (single regressor, beta = 1)."""

    T: int
    case: Case
    dynamics: ShortRunDynamics
    r_squared: float = 0.0
    rho: float = 1.0
    beta: float = 1.0
    u0_rule: str = "zero"  # "zero" | "large_fixed" | "large_random"
    lambda_u: float = 0.0
    burn_in: int = BURN_IN

    def __post_init__(self) -> None:
        if self.T < 5:
            raise InvalidConfigError(f"T={self.T} too small")
        if not 0.0 <= self.r_squared < 1.0:
            raise InvalidConfigError(f"r_squared must lie in [0, 1), got {self.r_squared}")
        if self.u0_rule not in ("zero", "large_fixed", "large_random"):
            raise InvalidConfigError(f"unknown u0 rule {self.u0_rule!r}")
        if self.u0_rule != "zero" and abs(self.rho) >= 1:
            raise UnitRhoError("large initial values require |rho| < 1")

    @classmethod
    def local_alternative(cls, T: int, case: Case, dynamics: ShortRunDynamics,
                          c: float, r_squared: float = 0.0, **kwargs) -> "DgpConfig":
        """Configuration with rho = 1 + c/T."""
        return cls(T=T, case=case, dynamics=dynamics, r_squared=r_squared,
                   rho=1.0 + c / T, **kwargs)

    @property
    def sigma_ev(self) -> float:
        return math.sqrt(self.r_squared)


def large_u0(lambda_u: float, rho_T: float, rule: str, rng: RngStream | None = None) -> float:
    """Initial error value of order 1/sqrt(1 - rho^2), fixed or normally drawn."""
    if abs(rho_T) >= 1.0:
        raise UnitRhoError(f"|rho|={abs(rho_T)} >= 1: initial-value scaling undefined")
    scale = lambda_u / math.sqrt(1.0 - rho_T**2)
    if rule == "large_fixed":
        return scale
    if rule == "large_random":
        if rng is None:
            raise InvalidConfigError("random initial value requires an RngStream")
        return float(rng.generator().standard_normal()) * scale
    raise InvalidConfigError(f"unknown u0 rule {rule!r}")


def _innovations(config: DgpConfig, g: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n pairs (eps, v), bivariate normal with unit variances and cov sigma_ev."""
    raw = g.standard_normal((n, 2))
    s = config.sigma_ev
    eps = raw[:, 0]
    v = s * raw[:, 0] + math.sqrt(1.0 - s**2) * raw[:, 1]
    return eps, v


def _xi_series(config: DgpConfig, eps: np.ndarray) -> np.ndarray:
    """Short-run error innovations, starting from xi = 0, h = 1 before the burn-in."""
    dyn = config.dynamics
    if dyn.kind == "iid":
        return eps
    if dyn.kind in ("ar", "ma", "arma"):
        # xi_t = phi xi_{t-1} + eps_t - theta eps_{t-1}; eps_0 (before the
        # sample) is taken as zero, which the burn-in washes out.
        b = [1.0, -dyn.theta] if dyn.kind in ("ma", "arma") else [1.0]
        a = [1.0, -dyn.phi] if dyn.kind in ("ar", "arma") else [1.0]
        return lfilter(b, a, eps)
    xi = np.empty_like(eps)
    omega = 1.0 - dyn.a1 - dyn.a2
    h_prev, xi_prev = 1.0, 0.0
    for t in range(eps.shape[0]):
        h = omega + dyn.a1 * xi_prev**2 + dyn.a2 * h_prev
        xi[t] = math.sqrt(h) * eps[t]
        h_prev, xi_prev = h, xi[t]
    return xi


def generate_sample(config: DgpConfig, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """One draw (y, X) of length T from the configured design.

    The error recursion runs through ``burn_in`` pre-sample periods starting
    from zero; under a large-initial-value rule the pre-sample error history is
    discarded and the recursion restarts from the prescribed u_0 instead.
    """
    T, burn = config.T, config.burn_in
    g = rng.generator()
    eps, v = _innovations(config, g, burn + T)
    xi = _xi_series(config, eps)
    if config.u0_rule == "zero":
        u = lfilter([1.0], [1.0, -config.rho], xi)[burn:]
    else:
        u0 = config.lambda_u / math.sqrt(1.0 - config.rho**2)
        if config.u0_rule == "large_random":
            u0 *= float(g.standard_normal())
        u = lfilter([1.0], [1.0, -config.rho], xi[burn:], zi=np.array([config.rho * u0]))[0]
    x0, mu, tau = _CASE_PARAMS[config.case]
    t_grid = np.arange(1, T + 1, dtype=float)
    x = x0 + mu * t_grid + np.cumsum(v[burn:])
    d = np.column_stack([np.ones(T), t_grid])[:, : config.case.n_deterministic]
    y = (d @ tau if tau.size else 0.0) + config.beta * x + u
    return y, x[:, None]


def longrun_covariance(dynamics: ShortRunDynamics, sigma_ev: float) -> np.ndarray:
    """Closed-form 2x2 long-run covariance of (xi, v) for each dynamics kind.

    Only used to verify that the implied squared long-run correlation equals
    sigma_ev**2 regardless of the short-run dynamics.
    """
    if dynamics.kind in ("iid", "garch"):
        return np.array([[1.0, sigma_ev], [sigma_ev, 1.0]])
    phi = dynamics.phi if dynamics.kind in ("ar", "arma") else 0.0
    theta = dynamics.theta if dynamics.kind in ("ma", "arma") else 0.0
    top = (1.0 - theta) ** 2 / (1.0 - phi) ** 2
    off = (1.0 - theta) * sigma_ev / (1.0 - phi)
    return np.array([[top, off], [off, 1.0]])
