"""Data-facing estimators: least squares fit, preliminary t-test, smoothed estimate, intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import QuadratureSpec, ScenarioConfig
from .distributions import t_quantile
from .kernels import kernel_arrays, r_delta_from

DEFAULT_QUAD = QuadratureSpec()


class RankDeficientError(ValueError):
    pass


class ExactFitError(ValueError):
    """Residual sum of squares is zero, so sigma_hat = 0 and gamma_hat is undefined."""

    def __init__(self, beta_hat: np.ndarray):
        self.beta_hat = beta_hat
        super().__init__("exact fit: residual sum of squares is zero, sigma_hat = 0")


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Full-column-rank n x p design with its QR factors.

    The first two columns carry theta and tau; (X'X)^{-1} comes from R.
    """

    X: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    xtx_inv: np.ndarray

    @classmethod
    def from_array(cls, X) -> "DesignMatrix":
        X = np.array(X, dtype=float)
        if X.ndim != 2:
            raise ValueError("design must be a 2-d array")
        n, p = X.shape
        if p < 2:
            raise ValueError("design needs at least the theta and tau columns")
        if p >= n:
            raise RankDeficientError(f"need p < n, got n={n}, p={p}")
        Q, R = np.linalg.qr(X)
        diag = np.abs(np.diag(R))
        if diag.min() <= 1e-12 * max(diag.max(), 1.0):
            raise RankDeficientError("design columns are linearly dependent")
        Rinv = np.linalg.solve(R, np.eye(p))
        X.setflags(write=False)
        return cls(X, Q, R, Rinv @ Rinv.T)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def v_theta(self) -> float:
        return float(self.xtx_inv[0, 0])

    @property
    def v_tau(self) -> float:
        return float(self.xtx_inv[1, 1])

    @property
    def rho(self) -> float:
        return float(self.xtx_inv[0, 1] / math.sqrt(self.v_theta * self.v_tau))

    def scenario(self, alpha: float = 0.05, alpha_tilde: float = 0.1) -> ScenarioConfig:
        return ScenarioConfig(
            n=self.n, m=self.n - self.p, rho=self.rho, alpha=alpha, alpha_tilde=alpha_tilde,
            v_theta=self.v_theta, v_tau=self.v_tau,
        )


def as_design(X) -> DesignMatrix:
    return X if isinstance(X, DesignMatrix) else DesignMatrix.from_array(X)


@dataclass(frozen=True)
class FittedModel:
    beta_hat: np.ndarray
    sigma_hat: float
    theta_hat: float
    tau_hat: float
    gamma_hat: float


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("interval lower bound exceeds upper bound")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def fit(X, y) -> FittedModel:
    """Least squares by QR; sigma_hat^2 = RSS / (n - p)."""
    design = as_design(X)
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise ValueError(f"response must have shape ({design.n},), got {y.shape}")
    beta = np.linalg.solve(design.R, design.Q.T @ y)
    resid = y - design.X @ beta
    rss = float(resid @ resid)
    if rss <= 1e-28 * max(float(y @ y), 1e-300):
        raise ExactFitError(beta)
    sigma = math.sqrt(rss / (design.n - design.p))
    return FittedModel(
        beta_hat=beta,
        sigma_hat=sigma,
        theta_hat=float(beta[0]),
        tau_hat=float(beta[1]),
        gamma_hat=float(beta[1] / (sigma * math.sqrt(design.v_tau))),
    )


def theta_pms(fitted: FittedModel, cfg: ScenarioConfig) -> float:
    """Post-model-selection estimate; |gamma_hat| = d_m selects the simpler model."""
    if abs(fitted.gamma_hat) <= cfg.d_m:
        return fitted.theta_hat - cfg.v_theta_tau / cfg.v_tau * fitted.tau_hat
    return fitted.theta_hat


def _kernels_at(gamma_hat: float, cfg: ScenarioConfig, quad: QuadratureSpec):
    k, q, h = (float(a[0]) for a in kernel_arrays(gamma_hat, cfg, quad))
    return k, float(r_delta_from(gamma_hat, k, q, h, cfg.rho, cfg.n))


def theta_tilde(fitted: FittedModel, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Ideal (infinitely many replications) bootstrap smoothed estimate of theta."""
    k, _ = _kernels_at(fitted.gamma_hat, cfg, quad)
    return fitted.theta_hat - cfg.rho * fitted.sigma_hat * math.sqrt(cfg.v_theta) * k


def j_delta(fitted: FittedModel, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> Interval:
    k, r = _kernels_at(fitted.gamma_hat, cfg, quad)
    scale = fitted.sigma_hat * math.sqrt(cfg.v_theta)
    centre = fitted.theta_hat - cfg.rho * scale * k
    half = cfg.t_alpha * scale * r
    return Interval(centre - half, centre + half)


def usual_interval(fitted: FittedModel, c: float, cfg: ScenarioConfig) -> Interval:
    """Full-model interval with coverage c."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"coverage must lie in (0, 1), got {c!r}")
    half = t_quantile(cfg.m, 1.0 - c) * fitted.sigma_hat * math.sqrt(cfg.v_theta)
    return Interval(fitted.theta_hat - half, fitted.theta_hat + half)
