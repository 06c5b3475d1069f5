"""numba-compiled inner loops. Signatures mirror _loops_numpy exactly."""

import math

import numpy as np
from numba import njit

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
INV_SQRT2 = 1.0 / math.sqrt(2.0)


@njit(cache=True, nogil=True)
def _phi(x):
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


@njit(cache=True, nogil=True)
def _Phi(x):
    return 0.5 * math.erfc(-x * INV_SQRT2)


@njit(cache=True, nogil=True)
def _psi(lo, hi, mu, sd):
    if hi <= lo:
        return 0.0
    a = (lo - mu) / sd
    b = (hi - mu) / sd
    if a > 0.0:
        val = _Phi(-a) - _Phi(-b)
    else:
        val = _Phi(b) - _Phi(a)
    return min(max(val, 0.0), 1.0)


@njit(cache=True, nogil=True)
def kernel_sums(g, z, wt):
    """(k, q, h) at each g, integrating over z = d_m * w with weights wt = f_W * dw."""
    n = g.shape[0]
    k = np.empty(n)
    q = np.empty(n)
    h = np.empty(n)
    for i in range(n):
        gi = abs(g[i])
        sk = 0.0
        sq = 0.0
        sh = 0.0
        for j in range(z.shape[0]):
            zj = z[j]
            a = _phi(zj + gi)
            b = _phi(zj - gi)
            c = _Phi(zj - gi) - _Phi(-zj - gi)
            sk += wt[j] * (a - b + gi * c)
            sq += wt[j] * (c - zj * (a + b))
            sh += wt[j] * zj * zj * (a - b)
        sign = -1.0 if g[i] < 0.0 else 1.0
        k[i] = sign * sk
        q[i] = sq
        h[i] = sign * sh
    return k, q, h


@njit(cache=True, nogil=True)
def window_integral(mode, gamma, rho, t_alpha, w, ww, g_nodes, g_wts, lo_coef, hi_coef,
                    order, g_max, dg, y_max, dh, gl_x, gl_w):
    """Outer w integral of the inner h = y + gamma integral over a window of +-y_max.

    mode 0 integrates Psi(l, u; rho*y, 1-rho^2) phi(y) (coverage); mode 1
    integrates w * r_delta(h/w) phi(y) (expected length). Inside |h| <= w*g_max
    the inner variable is g = h/w on the fixed g panels, where lo_coef/hi_coef
    hold -t r + rho k and t r + rho k (mode 0) or r (mode 1, in lo_coef).
    Outside, the kernels have decayed and r = 1, k = 0.
    """
    sd = math.sqrt(1.0 - rho * rho)
    n_panels = g_nodes.shape[0] // order
    total = 0.0
    for i in range(w.shape[0]):
        wi = w[i]
        acc = 0.0
        # kernel region, integrated in g
        glo = (gamma - y_max) / wi
        ghi = (gamma + y_max) / wi
        if ghi > -g_max and glo < g_max:
            j0 = max(0, int(math.floor((glo + g_max) / dg)))
            j1 = min(n_panels - 1, int(math.floor((ghi + g_max) / dg)))
            for j in range(j0, j1 + 1):
                for r in range(order):
                    idx = j * order + r
                    gv = g_nodes[idx]
                    y = wi * gv - gamma
                    if mode == 0:
                        f = _psi(wi * lo_coef[idx], wi * hi_coef[idx], rho * y, sd)
                    else:
                        f = wi * lo_coef[idx]
                    acc += g_wts[idx] * wi * f * _phi(y)
        # kernel-free region, integrated in h on up to two segments
        edge = wi * g_max
        for side in range(2):
            if side == 0:
                a = gamma - y_max
                b = min(-edge, gamma + y_max)
            else:
                a = max(edge, gamma - y_max)
                b = gamma + y_max
            if b <= a:
                continue
            count = max(1, int(math.ceil((b - a) / dh - 1e-12)))
            half = 0.5 * (b - a) / count
            for p in range(count):
                mid = a + (2 * p + 1) * half
                for r in range(order):
                    h = mid + half * gl_x[r]
                    y = h - gamma
                    if mode == 0:
                        f = _psi(-wi * t_alpha, wi * t_alpha, rho * y, sd)
                    else:
                        f = wi
                    acc += half * gl_w[r] * f * _phi(y)
        total += ww[i] * acc
    return total
