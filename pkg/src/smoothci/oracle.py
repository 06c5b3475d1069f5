"""Independent checks of the closed forms.

Three routes: the exponential-family matrix form of the delta-method sd,
full data-generation Monte Carlo (regression fits of simulated responses),
and finite-B parametric bootstrap smoothing.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import QuadratureSpec, ScenarioConfig
from .distributions import t_quantile
from .inference import DesignMatrix, FittedModel, as_design
from .kernels import kernel_arrays, r_delta_from

DEFAULT_QUAD = QuadratureSpec()
CHUNK = 20_000


@dataclass(frozen=True, eq=False)
class TrueParameters:
    """beta = [theta, tau, lambda...], sigma, and v_tau for the standardized gamma."""

    beta: np.ndarray
    sigma: float
    v_tau: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def gamma(self) -> float:
        return float(self.beta[1] / (self.sigma * math.sqrt(self.v_tau)))

    @classmethod
    def for_design(cls, X, gamma: float, sigma: float = 1.0, theta: float = 0.0, lam=None) -> "TrueParameters":
        design = as_design(X)
        beta = np.zeros(design.p)
        beta[0] = theta
        beta[1] = gamma * sigma * math.sqrt(design.v_tau)
        if lam is not None:
            beta[2:] = lam
        return cls(beta, sigma, design.v_tau)


@dataclass(frozen=True, eq=False)
class SufficientStatistic:
    yty: float
    beta_hat: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([[self.yty], self.beta_hat])


@dataclass(frozen=True, eq=False)
class NaturalParameter:
    eta: np.ndarray
    psi: float


@dataclass(frozen=True)
class SimulationReport:
    point_estimate: float
    standard_error: float
    replications: int
    seed: int


def make_design(n: int, p: int, rho: float, v_theta: float = 1.0, v_tau: float = 1.0, seed: int = 0) -> DesignMatrix:
    """Design whose (X'X)^{-1} is blockdiag([[v_theta, v_theta_tau], [v_theta_tau, v_tau]], I).

    X = U C with U a seeded n x p orthonormal frame and C the Cholesky factor
    of the target X'X, so (v_theta, v_tau, rho) are hit exactly.
    """
    if p < 2 or p >= n:
        raise ValueError(f"need 2 <= p < n, got n={n}, p={p}")
    target = np.eye(p)
    cov = rho * math.sqrt(v_theta * v_tau)
    target[:2, :2] = [[v_theta, cov], [cov, v_tau]]
    C = np.linalg.cholesky(np.linalg.inv(target)).T
    U, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))
    return DesignMatrix.from_array(U @ C)


def sufficient_statistic(X, y) -> SufficientStatistic:
    design = as_design(X)
    y = np.asarray(y, dtype=float)
    return SufficientStatistic(float(y @ y), np.linalg.solve(design.R, design.Q.T @ y))


def natural_parameter(params: TrueParameters, X) -> NaturalParameter:
    design = as_design(X)
    s2 = params.sigma**2
    xtx_beta = design.X.T @ (design.X @ params.beta)
    eta = np.concatenate([[-1.0 / (2.0 * s2)], xtx_beta / s2])
    psi = float(params.beta @ xtx_beta) / (2.0 * s2) + 0.5 * design.n * math.log(s2)
    return NaturalParameter(eta, psi)


def v_eta(params: TrueParameters, X) -> np.ndarray:
    """cov(s_hat) for s_hat = [y'y, beta_hat]."""
    design = as_design(X)
    b, s2 = params.beta, params.sigma**2
    quad_form = float(b @ design.X.T @ design.X @ b)
    p = design.p
    V = np.empty((p + 1, p + 1))
    V[0, 0] = 4.0 * quad_form + 2.0 * design.n * s2
    V[0, 1:] = 2.0 * b
    V[1:, 0] = 2.0 * b
    V[1:, 1:] = design.xtx_inv
    return s2 * V


def v_eta_inverse(params: TrueParameters, X) -> np.ndarray:
    """Closed-form inverse of v_eta."""
    design = as_design(X)
    b, s2, n = params.beta, params.sigma**2, design.n
    xtx = design.X.T @ design.X
    xtx_b = xtx @ b
    p = design.p
    Vi = np.empty((p + 1, p + 1))
    Vi[0, 0] = 1.0 / (2.0 * n * s2)
    Vi[0, 1:] = -xtx_b / (n * s2)
    Vi[1:, 0] = -xtx_b / (n * s2)
    Vi[1:, 1:] = (np.eye(p) + 2.0 / (n * s2) * np.outer(xtx_b, b)) @ xtx
    return Vi / s2


def cov_star(params: TrueParameters, X, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """cov(s_hat, theta_pms).

    The beta_hat block is sigma^2 (X'X)^{-1}(e1 - kappa e2), kappa = v_theta_tau q / v_tau.
    Its first two entries are v_theta(1 - rho^2 q) and rho sqrt(v_theta v_tau)(1 - q);
    the nuisance entries vanish when lambda_hat is uncorrelated with (theta_hat, tau_hat).
    """
    design = as_design(X)
    gamma = params.gamma
    k, q, h = (float(a[0]) for a in kernel_arrays(gamma, cfg, quad))
    s, s2 = params.sigma, params.sigma**2
    rho, v_theta = cfg.rho, cfg.v_theta
    kappa = cfg.v_theta_tau * q / cfg.v_tau
    out = np.empty(design.p + 1)
    out[0] = 2.0 * params.beta[0] - rho * s * math.sqrt(v_theta) * (gamma * q + k + h)
    out[1:] = design.xtx_inv[:, 0] - kappa * design.xtx_inv[:, 1]
    return s2 * out


def cov_star_exact(params: TrueParameters, X, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """cov(s_hat, theta_pms) including the residual sum of squares inside y'y.

    y'y - E(y'y) carries m sigma^2 (W^2 - 1), which is correlated with the
    acceptance event |gamma_tilde| <= d_m W and contributes -h_m. The y'y entry
    is therefore 2 theta - rho sigma sqrt(v_theta)(gamma q + k); the beta_hat
    block is unchanged.
    """
    out = cov_star(params, X, cfg, quad)
    h = float(kernel_arrays(params.gamma, cfg, quad)[2][0])
    out[0] += params.sigma**3 * cfg.rho * math.sqrt(cfg.v_theta) * h
    return out


def sd_delta_matrix_form(params: TrueParameters, X, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """(cov*' V^{-1} cov*)^{1/2}."""
    c = cov_star(params, X, cfg, quad)
    value = float(c @ v_eta_inverse(params, X) @ c)
    if value < 0:
        raise ArithmeticError(f"negative quadratic form {value!r} (gamma={params.gamma}, rho={cfg.rho})")
    return math.sqrt(value)


# --- Monte Carlo -------------------------------------------------------------------------------


def _chunks(reps: int, seed: int):
    """Fixed chunking with one spawned Philox stream per chunk; independent of thread count."""
    sizes = [CHUNK] * (reps // CHUNK)
    if reps % CHUNK:
        sizes.append(reps % CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return [(size, np.random.Generator(np.random.Philox(child))) for size, child in zip(sizes, children)]


def _map_chunks(fn, reps: int, seed: int, threads: int):
    chunks = _chunks(reps, seed)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda c: fn(*c), chunks))
    return [fn(*c) for c in chunks]


def _simulate_fits(design: DesignMatrix, params: TrueParameters, size: int, rng):
    """Simulate y = X beta + eps and fit by least squares; returns beta_hat, sigma_hat, y'y."""
    eps = rng.standard_normal((size, design.n)) * params.sigma
    Y = design.X @ params.beta + eps
    proj = np.linalg.solve(design.R, design.Q.T)  # beta_hat = proj @ y
    B = Y @ proj.T
    resid = Y - B @ design.X.T
    rss = np.einsum("ij,ij->i", resid, resid)
    return B, np.sqrt(rss / (design.n - design.p)), np.einsum("ij,ij->i", Y, Y)


def _pms(B, sigma_hat, cfg: ScenarioConfig):
    gamma_hat = B[:, 1] / (sigma_hat * math.sqrt(cfg.v_tau))
    accept = np.abs(gamma_hat) <= cfg.d_m
    return np.where(accept, B[:, 0] - cfg.v_theta_tau / cfg.v_tau * B[:, 1], B[:, 0]), gamma_hat


def _report(values: np.ndarray, seed: int) -> SimulationReport:
    n = values.shape[0]
    return SimulationReport(float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)), n, seed)


def _check_reps(reps: int, minimum: int = 1000) -> None:
    if reps < minimum:
        raise ValueError(f"need at least {minimum} replications, got {reps}")


def simulate_coverage(params: TrueParameters, X, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD,
                      reps: int = 100_000, seed: int = 0, threads: int = 1) -> SimulationReport:
    """Fraction of simulated datasets whose J_delta interval covers theta."""
    _check_reps(reps)
    design = as_design(X)
    theta = params.beta[0]

    def one(size, rng):
        B, sigma_hat, _ = _simulate_fits(design, params, size, rng)
        gamma_hat = B[:, 1] / (sigma_hat * math.sqrt(cfg.v_tau))
        k, q, h = kernel_arrays(gamma_hat, cfg, quad)
        r = r_delta_from(gamma_hat, k, q, h, cfg.rho, cfg.n)
        scale = sigma_hat * math.sqrt(cfg.v_theta)
        centre = B[:, 0] - cfg.rho * scale * k
        return (np.abs(centre - theta) <= cfg.t_alpha * scale * r).astype(float)

    return _report(np.concatenate(_map_chunks(one, reps, seed, threads)), seed)


def simulate_sel(params: TrueParameters, X, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD,
                 c_min: float = 0.95, reps: int = 100_000, seed: int = 0, threads: int = 1) -> SimulationReport:
    """Ratio of mean J_delta length to mean I(c_min) length, with delta-method SE."""
    _check_reps(reps)
    design = as_design(X)
    t_c = t_quantile(cfg.m, 1.0 - c_min)

    def one(size, rng):
        B, sigma_hat, _ = _simulate_fits(design, params, size, rng)
        gamma_hat = B[:, 1] / (sigma_hat * math.sqrt(cfg.v_tau))
        k, q, h = kernel_arrays(gamma_hat, cfg, quad)
        r = r_delta_from(gamma_hat, k, q, h, cfg.rho, cfg.n)
        scale = 2.0 * sigma_hat * math.sqrt(cfg.v_theta)
        return np.stack([cfg.t_alpha * scale * r, t_c * scale])

    num, den = np.concatenate(_map_chunks(one, reps, seed, threads), axis=1)
    ratio = num.mean() / den.mean()
    se = (num - ratio * den).std(ddof=1) / (math.sqrt(reps) * den.mean())
    return SimulationReport(float(ratio), float(se), reps, seed)


def simulate_theta_pms(params: TrueParameters, X, cfg: ScenarioConfig, reps: int = 1_000_000,
                       seed: int = 0, threads: int = 1) -> SimulationReport:
    """Monte Carlo mean of the post-model-selection estimator."""
    _check_reps(reps)
    design = as_design(X)

    def one(size, rng):
        B, sigma_hat, _ = _simulate_fits(design, params, size, rng)
        return _pms(B, sigma_hat, cfg)[0]

    return _report(np.concatenate(_map_chunks(one, reps, seed, threads)), seed)


def simulate_moments(params: TrueParameters, X, cfg: ScenarioConfig, reps: int = 100_000, seed: int = 0):
    """Monte Carlo estimates (and SEs) of cov(s_hat) and cov(s_hat, theta_pms).

    Uses the known mean of s_hat, so each entry is a plain sample mean of products.
    """
    _check_reps(reps)
    design = as_design(X)
    xb = design.X @ params.beta
    s_mean = np.concatenate([[float(xb @ xb) + design.n * params.sigma**2], params.beta])

    def one(size, rng):
        B, sigma_hat, yty = _simulate_fits(design, params, size, rng)
        dev = np.column_stack([yty, B]) - s_mean
        pms = _pms(B, sigma_hat, cfg)[0]
        outer = np.einsum("ri,rj->ij", dev, dev)
        outer_sq = np.einsum("ri,rj->ij", dev * dev, dev * dev)
        cross = dev.T @ pms
        cross_sq = (dev * dev).T @ (pms * pms)
        return outer, outer_sq, cross, cross_sq

    sums = [sum(part) for part in zip(*_map_chunks(one, reps, seed, 1))]

    def mean_se(total, total_sq):
        mean = total / reps
        var = (total_sq / reps - mean * mean) * reps / (reps - 1)
        return mean, np.sqrt(var / reps)

    return (*mean_se(sums[0], sums[1]), *mean_se(sums[2], sums[3]))


def bootstrap_smooth(fitted: FittedModel, X, cfg: ScenarioConfig, B: int = 100_000, seed: int = 0,
                     threads: int = 1) -> SimulationReport:
    """Finite-B parametric bootstrap smoothing of theta_pms around (beta_hat, sigma_hat)."""
    _check_reps(B)
    design = as_design(X)
    chol = np.linalg.cholesky(design.xtx_inv)

    def one(size, rng):
        z = rng.standard_normal((size, design.p))
        beta_star = fitted.beta_hat + fitted.sigma_hat * z @ chol.T
        sigma_star = fitted.sigma_hat * np.sqrt(rng.chisquare(cfg.m, size) / cfg.m)
        return _pms(beta_star, sigma_star, cfg)[0]

    return _report(np.concatenate(_map_chunks(one, B, seed, threads)), seed)
