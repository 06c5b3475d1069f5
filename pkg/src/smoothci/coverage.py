"""Coverage probability of the interval centred on the ideal bootstrap smoothed estimate."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .config import MAX_ABS_RHO, QuadratureSpec, ScenarioConfig
from .distributions import normal_cdf
from .kernels import kernel_arrays, r_delta_from, window_integral

DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class CoveragePoint:
    gamma: float
    rho: float
    cp: float


@dataclass(frozen=True)
class MinCoverageResult:
    c_min: float
    gamma_argmin: float
    search_grid_step: float


def psi(l: float, u: float, mu: float, v: float) -> float:
    """P(l <= Z <= u) for Z ~ N(mu, v)."""
    if not v > 0:
        raise ValueError(f"variance must be positive, got {v!r}")
    if u <= l:
        return 0.0
    sd = math.sqrt(v)
    a = (l - mu) / sd
    b = (u - mu) / sd
    val = normal_cdf(-a) - normal_cdf(-b) if a > 0 else normal_cdf(b) - normal_cdf(a)
    return float(min(max(val, 0.0), 1.0))


def ell_u(h: float, w: float, rho: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """Bounds (l, u) on G = (theta_hat - theta)/(sigma sqrt(v_theta)) for coverage, given gamma_tilde=h, W=w."""
    if not w > 0:
        raise ValueError(f"w must be positive, got {w!r}")
    g = h / w
    k, q, hh = (float(a[0]) for a in kernel_arrays(g, cfg, quad))
    r = float(r_delta_from(g, k, q, hh, rho, cfg.n))
    half = w * cfg.t_alpha * r
    shift = w * rho * k
    return shift - half, shift + half


def _check_rho(rho: float) -> None:
    if not abs(rho) <= MAX_ABS_RHO:
        raise ValueError(f"|rho| must not exceed {MAX_ABS_RHO}, got {rho!r}")


def cp_delta(gamma: float, rho: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> CoveragePoint:
    """CP_delta(gamma, rho) by the (w, y) double integral of Psi(l, u; rho*y, 1-rho^2) phi(y) f_W(w)."""
    _check_rho(rho)
    if not math.isfinite(gamma):
        raise ValueError("gamma must be finite")
    cp = window_integral(0, gamma, rho, cfg.with_rho(rho), quad)
    return CoveragePoint(float(gamma), float(rho), float(min(max(cp, 0.0), 1.0)))


def min_coverage(
    rho: float,
    cfg: ScenarioConfig,
    quad: QuadratureSpec = DEFAULT_QUAD,
    gamma_max: float = 15.0,
    step: float = 0.05,
) -> MinCoverageResult:
    """Minimum of CP_delta over gamma in [0, gamma_max].

    Coarse grid search followed by a bounded scalar refinement around the grid
    argmin, to 1e-4 in gamma. Evenness in gamma justifies the half line.
    """
    _check_rho(rho)
    return _min_coverage(float(rho), cfg.with_rho(rho), quad, float(gamma_max), float(step))


@lru_cache(maxsize=256)
def _min_coverage(rho, cfg, quad, gamma_max, step):
    grid = np.linspace(0.0, gamma_max, int(round(gamma_max / step)) + 1)
    values = np.array([window_integral(0, g, rho, cfg, quad) for g in grid])
    i = int(np.argmin(values))
    best_g, best_v = float(grid[i]), float(values[i])
    if i == len(grid) - 1:
        warnings.warn(f"coverage minimum found at gamma_max={gamma_max}; the true minimum may lie beyond it", RuntimeWarning, stacklevel=3)
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda g: window_integral(0, g, rho, cfg, quad),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-4},
        )
        if res.fun < best_v:
            best_g, best_v = float(res.x), float(res.fun)
    return MinCoverageResult(c_min=best_v, gamma_argmin=best_g, search_grid_step=step)
