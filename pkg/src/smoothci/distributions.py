"""Scalar distributions used throughout: normal pdf/cdf, Student t, and W = sigma_hat/sigma."""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize, special

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
INV_SQRT2 = 1.0 / math.sqrt(2.0)


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return out[()] if out.ndim == 0 else out


def normal_cdf(x):
    """Standard normal cdf via erfc, so both tails keep full relative accuracy."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(-x * INV_SQRT2)
    return out[()] if out.ndim == 0 else out


def _check_dof(m) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {m!r}")
    return int(m)


def _t_central(x: float, m: int) -> float:
    """P(|T| <= x) for x >= 0."""
    x2 = x * x
    return float(special.betainc(0.5, 0.5 * m, x2 / (m + x2)))


def t_sf(x: float, m: int) -> float:
    """Upper tail P(T > x) for T ~ t_m.

    The tail form is used beyond |x| = sqrt(m) and the central form inside,
    so neither end suffers cancellation.
    """
    m = _check_dof(m)
    if x == 0.0:
        return 0.5
    x2 = x * x
    if x2 >= m:
        tail = 0.5 * float(special.betainc(0.5 * m, 0.5, m / (m + x2)))
    else:
        tail = 0.5 - 0.5 * _t_central(abs(x), m)
    return tail if x > 0 else 1.0 - tail


def t_cdf(x: float, m: int) -> float:
    return 1.0 - t_sf(x, m) if x > 0 else t_sf(-x, m)


def t_quantile(m: int, a: float) -> float:
    """Two-sided critical value t_m(a), i.e. P(T <= t_m(a)) = 1 - a/2.

    Small a is solved on the upper tail and large a on the central mass 1 - a,
    which keeps full relative accuracy at both ends.
    """
    m = _check_dof(m)
    if not 0.0 < a < 1.0:
        raise ValueError(f"two-sided tail level must lie in (0, 1), got {a!r}")
    if a > 0.5:
        target = 1.0 - a
        fn = lambda x: _t_central(x, m) - target  # noqa: E731
        hi = 1.0
        while fn(hi) < 0:
            hi *= 2.0
    else:
        target = 0.5 * a
        fn = lambda x: t_sf(x, m) - target  # noqa: E731
        hi = 1.0
        while fn(hi) > 0:
            hi *= 2.0
    return optimize.brentq(fn, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _log_fw_const(m: int) -> float:
    return math.log(2.0) + 0.5 * m * math.log(0.5 * m) - math.lgamma(0.5 * m)


def f_W(w, m: int):
    """Density of W = (Q/m)^{1/2}, Q ~ chi-square(m); evaluated in log space."""
    m = _check_dof(m)
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("f_W is defined for w > 0 only")
    out = np.exp(_log_fw_const(m) + (m - 1) * np.log(w) - 0.5 * m * w * w)
    return out[()] if out.ndim == 0 else out


def expected_W(m: int) -> float:
    """E(W) = (m/2)^{-1/2} Gamma((m+1)/2) / Gamma(m/2)."""
    m = _check_dof(m)
    return math.exp(math.lgamma(0.5 * (m + 1)) - math.lgamma(0.5 * m) - 0.5 * math.log(0.5 * m))


def w_tail_bounds(m: int, tail: float) -> tuple[float, float]:
    """Interval [lo, hi] with P(W < lo) = P(W > hi) = tail."""
    m = _check_dof(m)
    lo = math.sqrt(2.0 * special.gammaincinv(0.5 * m, tail) / m)
    hi = math.sqrt(2.0 * special.gammainccinv(0.5 * m, tail) / m)
    return lo, hi


def w_tail_mass(w: float, m: int) -> float:
    """P(W > w)."""
    return float(special.gammaincc(0.5 * m, 0.5 * m * w * w))
