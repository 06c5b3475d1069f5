"""Time the numba and pure-numpy loop backends on the two hot kernels.

    python benchmarks/bench_backends.py [--repeat 5]

Both backends are imported directly, so SMOOTHCI_BACKEND does not matter here.
The end-to-end row runs one coverage evaluation in a subprocess per backend.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from smoothci import QuadratureSpec, ScenarioConfig, _loops_numba, _loops_numpy
from smoothci.kernels import _kernel_rule, gauss_legendre, kernel_grid, outer_rule, r_delta_from, rho_refinement


def best_of(fn, repeat):
    fn()  # warm-up (numba compile / cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def window_args(cfg, quad, gamma):
    grid = kernel_grid(cfg, quad, rho_refinement(cfg.rho))
    outer = outer_rule(cfg.m, max(1.0, cfg.t_alpha, cfg.d_m), quad)
    r = r_delta_from(grid.g, grid.k, grid.q, grid.h, cfg.rho, cfg.n)
    gx, gw = gauss_legendre(quad.order)
    return (0, gamma, cfg.rho, cfg.t_alpha, outer.w, outer.weights, grid.g, grid.weights,
            -cfg.t_alpha * r + cfg.rho * grid.k, cfg.t_alpha * r + cfg.rho * grid.k,
            quad.order, grid.g_max, grid.dg, quad.y_max, grid.dh, gx, gw)


def end_to_end(backend):
    code = ("import time;from smoothci import cp_delta, ScenarioConfig;c=ScenarioConfig(n=25,m=1);"
            "cp_delta(0.0,0.9,c);t=time.perf_counter();[cp_delta(g,0.9,c) for g in (0.5,1.5,3.0)];"
            "print((time.perf_counter()-t)/3)")
    env = dict(os.environ, SMOOTHCI_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    quad = QuadratureSpec()
    cfg = ScenarioConfig(n=25, m=1, rho=0.9)
    z, wt = _kernel_rule(cfg.m, cfg.d_m, quad)
    g = np.linspace(-40, 40, 2000)
    wargs = window_args(cfg, quad, 1.5)

    rows = []
    for name, fn_numba, fn_numpy in [
        ("kernel_sums (2000 gammas)", lambda: _loops_numba.kernel_sums(g, z, wt), lambda: _loops_numpy.kernel_sums(g, z, wt)),
        ("window_integral (one CP)", lambda: _loops_numba.window_integral(*wargs), lambda: _loops_numpy.window_integral(*wargs)),
    ]:
        rows.append((name, best_of(fn_numba, args.repeat), best_of(fn_numpy, args.repeat)))
    rows.append(("cp_delta end to end", end_to_end("numba"), end_to_end("numpy")))

    print(f"{'kernel':<28}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, tn, tp in rows:
        print(f"{name:<28}{1e3 * tn:>12.2f}{1e3 * tp:>12.2f}{tp / tn:>10.1f}")


if __name__ == "__main__":
    main()
