"""Scaled expected length of the smoothed-estimator interval."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import QuadratureSpec, ScenarioConfig
from .coverage import DEFAULT_QUAD, _check_rho, min_coverage
from .distributions import expected_W, t_quantile
from .kernels import window_integral


@dataclass(frozen=True)
class SelPoint:
    gamma: float
    rho: float
    sel: float
    c_min_used: float


def sel_limit(c_min: float, cfg: ScenarioConfig) -> float:
    """Large-|gamma| value t_m(alpha) / t_m(1 - c_min)."""
    return cfg.t_alpha / t_quantile(cfg.m, 1.0 - c_min)


def sel_delta(gamma: float, rho: float, c_min: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> SelPoint:
    """E(length of J_delta) / E(length of I(c_min)).

    Equals t_m(alpha)/t_m(1 - c_min) * E(W r_delta(gamma_tilde / W)) / E(W).
    """
    _check_rho(rho)
    if not 0.5 < c_min < 1.0:
        raise ValueError(f"c_min must lie in (0.5, 1), got {c_min!r}")
    if not math.isfinite(gamma):
        raise ValueError("gamma must be finite")
    integral = window_integral(1, gamma, rho, cfg.with_rho(rho), quad)
    value = sel_limit(c_min, cfg) * integral / expected_W(cfg.m)
    return SelPoint(float(gamma), float(rho), float(value), float(c_min))


def sel_curve(rho: float, gamma_grid, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD, gamma_max: float = 15.0) -> list[SelPoint]:
    """SEL over a gamma grid, with c_min computed once for this rho."""
    gamma_grid = list(gamma_grid)
    if not gamma_grid:
        raise ValueError("gamma grid must be non-empty")
    c_min = min_coverage(rho, cfg, quad, gamma_max=gamma_max).c_min
    return [sel_delta(g, rho, c_min, cfg, quad) for g in gamma_grid]
