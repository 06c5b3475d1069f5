"""Immutable scenario and quadrature settings shared by every numerical module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .distributions import normal_cdf, t_quantile, w_tail_bounds, w_tail_mass

MAX_ABS_RHO = 0.999


@dataclass(frozen=True)
class ScenarioConfig:
    """Constants of the two-nested-models scenario.

    Only (n, m, rho, alpha, alpha_tilde) affect coverage and expected length;
    v_theta and v_tau scale the interval but are kept for the data-facing side.
    The covariance v_theta_tau = rho * sqrt(v_theta * v_tau) is implied.
    """

    n: int
    m: int
    rho: float = 0.0
    alpha: float = 0.05
    alpha_tilde: float = 0.1
    v_theta: float = 1.0
    v_tau: float = 1.0
    d_m: float = field(init=False)
    t_alpha: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.m < 1 or int(self.m) != self.m:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if self.n <= self.m or int(self.n) != self.n:
            raise ValueError(f"need integer n > m (so that p = n - m >= 1), got n={self.n!r}, m={self.m!r}")
        if not abs(self.rho) < 1.0:
            raise ValueError(f"|rho| must be < 1, got {self.rho!r}")
        if self.v_theta <= 0 or self.v_tau <= 0:
            raise ValueError("v_theta and v_tau must be positive")
        object.__setattr__(self, "d_m", t_quantile(self.m, self.alpha_tilde))
        object.__setattr__(self, "t_alpha", t_quantile(self.m, self.alpha))

    @property
    def p(self) -> int:
        return self.n - self.m

    @property
    def v_theta_tau(self) -> float:
        return self.rho * math.sqrt(self.v_theta * self.v_tau)

    def with_rho(self, rho: float) -> "ScenarioConfig":
        return self if rho == self.rho else replace(self, rho=rho)


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation and resolution of the (w, y) integrals.

    nodes_w and nodes_y are base node counts; panel widths scale with their
    reciprocals, so doubling them halves every panel. w_max=None derives the
    upper w truncation from tail_mass per degrees of freedom.
    """

    nodes_w: int = 100
    nodes_y: int = 128
    y_max: float = 8.5
    w_max: float | None = None
    abs_tol: float = 1e-9
    order: int = 8
    tail_mass: float = 1e-13

    def __post_init__(self):
        if self.nodes_w < self.order or self.nodes_y < self.order:
            raise ValueError("node counts must be at least one panel")
        if self.tail_mass > self.abs_tol / 10:
            raise ValueError("tail_mass must be below abs_tol / 10")
        if normal_cdf(-self.y_max) >= self.abs_tol / 10:
            raise ValueError(f"y_max={self.y_max} leaves normal tail mass above abs_tol / 10")

    def doubled(self) -> "QuadratureSpec":
        return replace(self, nodes_w=2 * self.nodes_w, nodes_y=2 * self.nodes_y)

    def w_range(self, m: int) -> tuple[float, float]:
        lo, hi = w_tail_bounds(m, self.tail_mass)
        if m <= 2:
            lo = 0.0
        if self.w_max is not None:
            if w_tail_mass(self.w_max, m) >= self.abs_tol / 10:
                raise ValueError(f"w_max={self.w_max} leaves f_W tail mass above abs_tol / 10 for m={m}")
            hi = self.w_max
        return lo, hi
