"""Pure-numpy versions of the inner loops, used when numba is unavailable or disabled."""

import math

import numpy as np
from scipy.special import erfc

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
INV_SQRT2 = 1.0 / math.sqrt(2.0)
_CHUNK = 1 << 21


def _phi(x):
    return INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _Phi(x):
    return 0.5 * erfc(-x * INV_SQRT2)


def _psi(lo, hi, mu, sd):
    a = (lo - mu) / sd
    b = (hi - mu) / sd
    upper = a > 0.0
    val = np.where(upper, _Phi(-a) - _Phi(-b), _Phi(b) - _Phi(a))
    val = np.where(hi <= lo, 0.0, val)
    return np.clip(val, 0.0, 1.0)


def kernel_sums(g, z, wt):
    g = np.asarray(g, dtype=float)
    k = np.empty_like(g)
    q = np.empty_like(g)
    h = np.empty_like(g)
    step = max(1, _CHUNK // max(1, z.shape[0]))
    for s in range(0, g.shape[0], step):
        gi = np.abs(g[s:s + step])[:, None]
        a = _phi(z + gi)
        b = _phi(z - gi)
        c = _Phi(z - gi) - _Phi(-z - gi)
        sign = np.where(g[s:s + step] < 0.0, -1.0, 1.0)
        k[s:s + step] = sign * ((a - b + gi * c) @ wt)
        q[s:s + step] = (c - z * (a + b)) @ wt
        h[s:s + step] = sign * (((a - b) * (z * z)) @ wt)
    return k, q, h


def window_integral(mode, gamma, rho, t_alpha, w, ww, g_nodes, g_wts, lo_coef, hi_coef,
                    order, g_max, dg, y_max, dh, gl_x, gl_w):
    sd = math.sqrt(1.0 - rho * rho)
    n_panels = g_nodes.shape[0] // order
    total = 0.0
    for wi, wwi in zip(w, ww):
        acc = 0.0
        glo = (gamma - y_max) / wi
        ghi = (gamma + y_max) / wi
        if ghi > -g_max and glo < g_max:
            j0 = max(0, int(math.floor((glo + g_max) / dg)))
            j1 = min(n_panels - 1, int(math.floor((ghi + g_max) / dg)))
            sl = slice(j0 * order, (j1 + 1) * order)
            y = wi * g_nodes[sl] - gamma
            if mode == 0:
                f = _psi(wi * lo_coef[sl], wi * hi_coef[sl], rho * y, sd)
            else:
                f = wi * lo_coef[sl]
            acc += np.sum(g_wts[sl] * wi * f * _phi(y))
        edge = wi * g_max
        for a, b in ((gamma - y_max, min(-edge, gamma + y_max)), (max(edge, gamma - y_max), gamma + y_max)):
            if b <= a:
                continue
            count = max(1, int(math.ceil((b - a) / dh - 1e-12)))
            half = 0.5 * (b - a) / count
            mids = a + (2 * np.arange(count) + 1) * half
            h = (mids[:, None] + half * gl_x).ravel()
            y = h - gamma
            if mode == 0:
                f = _psi(np.full_like(y, -wi * t_alpha), np.full_like(y, wi * t_alpha), rho * y, sd)
            else:
                f = wi
            acc += np.sum(np.tile(half * gl_w, count) * f * _phi(y))
        total += wwi * acc
    return total
