"""The kernel integrals k_m, q_m, h_m and the delta-method scale factor r_delta.

All three kernels are integrals over w against f_W of closed-form expressions
in d_m * w and gamma. They share one set of w nodes and are always evaluated
together.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import loops
from .config import MAX_ABS_RHO, QuadratureSpec, ScenarioConfig
from .distributions import f_W
from .quadrature import graded_edges, panel_rule, uniform_edges, gauss_legendre

__all__ = [
    "KernelValues",
    "QuadratureError",
    "QuadratureSpec",
    "ScenarioConfig",
    "kernel_arrays",
    "k_m",
    "q_m",
    "h_m",
    "r_delta",
    "r_delta_from",
    "sd_delta",
    "kernel_cutoff",
]

_lock = threading.Lock()


class QuadratureError(ArithmeticError):
    """Estimated quadrature error exceeds the requested tolerance."""

    def __init__(self, what: str, estimate: float, tol: float, **context):
        self.what = what
        self.estimate = estimate
        self.tol = tol
        self.context = context
        extra = ", ".join(f"{k}={v!r}" for k, v in context.items())
        super().__init__(f"{what}: estimated error {estimate:.3g} exceeds tolerance {tol:.3g} ({extra})")


@dataclass(frozen=True)
class KernelValues:
    gamma: float
    k: float
    q: float
    h: float
    r_delta: float


def _resolution(quad: QuadratureSpec) -> float:
    return quad.order / quad.nodes_w


@lru_cache(maxsize=64)
def _kernel_rule(m: int, d_m: float, quad: QuadratureSpec, coarsen: int = 1):
    lo, hi = quad.w_range(m)
    s = _resolution(quad) * coarsen
    width = min((hi - lo) * s, 12.0 * s / max(d_m, 1.0))
    w, dw = panel_rule(uniform_edges(lo, hi, width), quad.order)
    z = d_m * w
    wt = dw * f_W(w, m)
    z.setflags(write=False)
    wt.setflags(write=False)
    return z, wt


def kernel_cutoff(cfg: ScenarioConfig, quad: QuadratureSpec) -> float:
    """|gamma| beyond which k, q, h are below the truncation error of their own integrals."""
    _, hi = quad.w_range(cfg.m)
    return max(40.0, cfg.d_m * hi + 9.0)


def kernel_arrays(gamma, cfg: ScenarioConfig, quad: QuadratureSpec, check: bool = False):
    """Vectorized (k, q, h) at every entry of gamma.

    Arguments beyond kernel_cutoff return exact zeros. With check=True the
    result is compared against a rule with half the panels and a
    QuadratureError is raised when they differ by more than quad.abs_tol.
    """
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if not np.all(np.isfinite(g)):
        raise ValueError("gamma must be finite")
    k = np.zeros_like(g)
    q = np.zeros_like(g)
    h = np.zeros_like(g)
    inside = np.abs(g) <= kernel_cutoff(cfg, quad)
    if np.any(inside):
        z, wt = _kernel_rule(cfg.m, cfg.d_m, quad)
        k[inside], q[inside], h[inside] = loops.kernel_sums(g[inside], z, wt)
        if check:
            zc, wc = _kernel_rule(cfg.m, cfg.d_m, quad, coarsen=2)
            kc, qc, hc = loops.kernel_sums(g[inside], zc, wc)
            err = max(np.max(np.abs(k[inside] - kc)), np.max(np.abs(q[inside] - qc)), np.max(np.abs(h[inside] - hc)))
            if err > quad.abs_tol:
                raise QuadratureError("kernel integrals", float(err), quad.abs_tol, m=cfg.m, d_m=cfg.d_m)
    return k, q, h


def r_delta_from(gamma, k, q, h, rho: float, n: int):
    """Compose r_delta from kernel values."""
    rho2 = rho * rho
    s = k + h - gamma * q
    return np.sqrt(rho2 / (2.0 * n) * s * s + 1.0 - 2.0 * rho2 * q + rho2 * q * q)


def _scalar(gamma, cfg, quad, idx):
    return float(kernel_arrays(gamma, cfg, quad, check=True)[idx][0])


def k_m(gamma: float, cfg: ScenarioConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """k_m(gamma); odd in gamma."""
    return _scalar(gamma, cfg, quad, 0)


def q_m(gamma: float, cfg: ScenarioConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """q_m(gamma); even in gamma and decaying to 0."""
    return _scalar(gamma, cfg, quad, 1)


def h_m(gamma: float, cfg: ScenarioConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """h_m(gamma); odd in gamma."""
    return _scalar(gamma, cfg, quad, 2)


def r_delta(gamma: float, cfg: ScenarioConfig, quad: QuadratureSpec = QuadratureSpec()) -> KernelValues:
    k, q, h = (float(a[0]) for a in kernel_arrays(gamma, cfg, quad, check=True))
    r = float(r_delta_from(gamma, k, q, h, cfg.rho, cfg.n))
    return KernelValues(float(gamma), k, q, h, r)


def sd_delta(gamma: float, sigma: float, cfg: ScenarioConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Ideal delta-method sd of the smoothed estimator: sigma * sqrt(v_theta) * r_delta(gamma)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return sigma * math.sqrt(cfg.v_theta) * r_delta(gamma, cfg, quad).r_delta


# --- layouts for the (w, y) double integrals -------------------------------------------------


@dataclass(frozen=True)
class OuterRule:
    w: np.ndarray
    weights: np.ndarray  # GL weight times f_W(w)


@dataclass(frozen=True)
class KernelGrid:
    """Kernel values tabulated on symmetric Gauss-Legendre panels in g = h / w."""

    g: np.ndarray
    weights: np.ndarray
    k: np.ndarray
    q: np.ndarray
    h: np.ndarray
    g_max: float
    dg: float
    dh: float


@lru_cache(maxsize=64)
def outer_rule(m: int, scale: float, quad: QuadratureSpec) -> OuterRule:
    lo, hi = quad.w_range(m)
    s = _resolution(quad)
    edges = graded_edges(lo, hi, max_width=(hi - lo) * s, rel=5.0 * s, min_width=2.0 * s / scale)
    w, dw = panel_rule(edges, quad.order)
    return OuterRule(w, dw * f_W(w, m))


def rho_refinement(rho: float) -> int:
    """Halvings of the y step needed to resolve the conditional normal with variance 1 - rho^2."""
    if abs(rho) > MAX_ABS_RHO:
        raise ValueError(f"|rho| must not exceed {MAX_ABS_RHO}, got {rho!r}")
    factor = min(1.0, 2.5 * math.sqrt(1.0 - rho * rho))
    return max(0, math.ceil(math.log2(1.0 / factor) - 1e-12))


def kernel_grid(cfg: ScenarioConfig, quad: QuadratureSpec, refine: int = 0) -> KernelGrid:
    with _lock:
        return _kernel_grid(cfg.m, cfg.alpha_tilde, quad, refine)


@lru_cache(maxsize=32)
def _kernel_grid(m: int, alpha_tilde: float, quad: QuadratureSpec, refine: int) -> KernelGrid:
    cfg = ScenarioConfig(n=m + 1, m=m, alpha_tilde=alpha_tilde)
    _, w_hi = quad.w_range(m)
    dh = 2.0 * quad.y_max * quad.order / quad.nodes_y / 2**refine
    g_max = kernel_cutoff(cfg, quad)
    half_panels = math.ceil(g_max / (dh / max(1.0, w_hi)))
    dg = g_max / half_panels
    g_pos, wt_pos = panel_rule(np.linspace(0.0, g_max, half_panels + 1), quad.order)
    z, wt = _kernel_rule(m, cfg.d_m, quad)
    k_pos, q_pos, h_pos = loops.kernel_sums(g_pos, z, wt)
    # coarse-rule check on a sparse subsample keeps the build cost bounded
    sub = slice(None, None, 7)
    zc, wc = _kernel_rule(m, cfg.d_m, quad, coarsen=2)
    kc, qc, hc = loops.kernel_sums(g_pos[sub], zc, wc)
    err = max(np.max(np.abs(k_pos[sub] - kc)), np.max(np.abs(q_pos[sub] - qc)), np.max(np.abs(h_pos[sub] - hc)))
    if err > quad.abs_tol:
        raise QuadratureError("kernel grid", float(err), quad.abs_tol, m=m, alpha_tilde=alpha_tilde)
    g = np.concatenate([-g_pos[::-1], g_pos])
    return KernelGrid(
        g=g,
        weights=np.concatenate([wt_pos[::-1], wt_pos]),
        k=np.concatenate([-k_pos[::-1], k_pos]),
        q=np.concatenate([q_pos[::-1], q_pos]),
        h=np.concatenate([-h_pos[::-1], h_pos]),
        g_max=g_max,
        dg=dg,
        dh=dh,
    )


def window_integral(mode: int, gamma: float, rho: float, cfg: ScenarioConfig, quad: QuadratureSpec) -> float:
    """Shared driver for the coverage (mode 0) and expected-length (mode 1) double integrals."""
    grid = kernel_grid(cfg, quad, rho_refinement(rho))
    outer = outer_rule(cfg.m, max(1.0, cfg.t_alpha, cfg.d_m), quad)
    r = r_delta_from(grid.g, grid.k, grid.q, grid.h, rho, cfg.n)
    if mode == 0:
        lo = -cfg.t_alpha * r + rho * grid.k
        hi = cfg.t_alpha * r + rho * grid.k
    else:
        lo = r
        hi = r
    gx, gw = gauss_legendre(quad.order)
    return float(
        loops.window_integral(
            mode, float(gamma), float(rho), float(cfg.t_alpha), outer.w, outer.weights,
            grid.g, grid.weights, lo, hi, quad.order, grid.g_max, grid.dg,
            float(quad.y_max), grid.dh, gx, gw,
        )
    )
