"""Command line front end: coverage / SEL sweeps and oracle verification, written as CSV.

Config files are flat TOML (key = value, no tables). Recognised keys:

    n, m (or p)               sample size and residual degrees of freedom
    rho                       list of correlations
    alpha, alpha_tilde        interval level and preliminary-test size
    gamma_min, gamma_max, gamma_step
    mode                      coverage | sel | both | verify
    out, seed, threads, reps
    search_gamma_max          upper end of the c_min search (default 15)
    nodes_w, nodes_y, y_max, abs_tol, order    quadrature overrides
    verify_gamma, verify_rho, verify_sel_gamma, verify_sel_rho
    plot                      also write gnuplot scripts (default false)

Exit codes: 0 success, 1 a verify check failed, 2 invalid config,
3 quadrature failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .config import MAX_ABS_RHO, QuadratureSpec, ScenarioConfig
from .coverage import cp_delta, min_coverage
from .kernels import QuadratureError, kernel_arrays, sd_delta
from .sel import sel_delta
from . import oracle

logger = logging.getLogger("smoothci")

MODES = ("coverage", "sel", "both", "verify")
EXIT_VERIFY_FAILED, EXIT_CONFIG, EXIT_QUADRATURE, EXIT_IO = 1, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 25
    m: int = 1
    rho: list = field(default_factory=lambda: [0.2, 0.5, 0.7, 0.9])
    alpha: float = 0.05
    alpha_tilde: float = 0.1
    gamma_min: float = -10.0
    gamma_max: float = 10.0
    gamma_step: float = 0.1
    mode: str = "both"
    out: str = "results"
    seed: int = 0
    threads: int = 1
    reps: int = 100_000
    search_gamma_max: float = 15.0
    nodes_w: int = QuadratureSpec.nodes_w
    nodes_y: int = QuadratureSpec.nodes_y
    y_max: float = QuadratureSpec.y_max
    abs_tol: float = QuadratureSpec.abs_tol
    order: int = QuadratureSpec.order
    verify_gamma: list = field(default_factory=lambda: [0.0, 1.5, 3.0])
    verify_rho: list = field(default_factory=lambda: [0.5, 0.9])
    verify_sel_gamma: list = field(default_factory=lambda: [0.0, 3.0])
    verify_sel_rho: list = field(default_factory=lambda: [0.9])
    plot: bool = False

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        if "p" in data:
            if "m" in data:
                raise ConfigError("give either m or p, not both")
            data["m"] = data.get("n", cls.n) - data.pop("p")
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in data.items():
            if isinstance(value, dict):
                raise ConfigError(f"config must be flat; key {key!r} holds a table")
        for key in ("rho", "verify_gamma", "verify_rho", "verify_sel_gamma", "verify_sel_rho"):
            if key in data and not isinstance(data[key], list):
                data[key] = [data[key]]
        try:
            cfg = cls(**data)
            cfg.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.rho:
            raise ConfigError("rho list is empty")
        for r in [*self.rho, *self.verify_rho, *self.verify_sel_rho]:
            if not abs(r) <= MAX_ABS_RHO:
                raise ConfigError(f"rho values must lie in (-1, 1) with |rho| <= {MAX_ABS_RHO}, got {r}")
        if not self.gamma_step > 0 or self.gamma_max < self.gamma_min:
            raise ConfigError("gamma grid is empty")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.reps < 1000:
            raise ConfigError("reps must be >= 1000")
        self.scenario()
        self.quadrature()

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(n=self.n, m=self.m, alpha=self.alpha, alpha_tilde=self.alpha_tilde)

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(nodes_w=self.nodes_w, nodes_y=self.nodes_y, y_max=self.y_max,
                              abs_tol=self.abs_tol, order=self.order)

    def gamma_grid(self) -> list[float]:
        count = int(math.floor((self.gamma_max - self.gamma_min) / self.gamma_step + 1e-9)) + 1
        return [round(self.gamma_min + i * self.gamma_step, 12) for i in range(count)]


def _read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def load_config(path) -> RunConfig:
    return RunConfig.from_mapping(_read_toml(path))


def _fmt(x) -> str:
    return format(x, ".17g") if isinstance(x, float) else str(x)


def _write_csv(path: Path, config: RunConfig, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# smoothci " + json.dumps(asdict(config), sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _pool_map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def coverage_rows(config: RunConfig):
    scen, quad = config.scenario(), config.quadrature()
    points = [(r, g) for r in sorted(config.rho) for g in config.gamma_grid()]
    values = _pool_map(lambda rg: cp_delta(rg[1], rg[0], scen, quad).cp, points, config.threads)
    return [(g, r, v) for (r, g), v in zip(points, values)]


def sel_rows(config: RunConfig):
    scen, quad = config.scenario(), config.quadrature()
    rhos = sorted(config.rho)
    c_mins = dict(zip(rhos, _pool_map(
        lambda r: min_coverage(r, scen, quad, gamma_max=config.search_gamma_max).c_min, rhos, config.threads)))
    points = [(r, g) for r in rhos for g in config.gamma_grid()]
    values = _pool_map(lambda rg: sel_delta(rg[1], rg[0], c_mins[rg[0]], scen, quad).sel, points, config.threads)
    return [(g, r, v, c_mins[r]) for (r, g), v in zip(points, values)]


def verify_rows(config: RunConfig):
    """Oracle-vs-exact checks: (check, gamma, rho, exact, estimate, se, tolerance, status)."""
    scen, quad = config.scenario(), config.quadrature()
    rows = []
    seed = config.seed

    def mc_row(name, gamma, rho, exact, report):
        tol = 3.0 * report.standard_error
        ok = abs(report.point_estimate - exact) <= tol
        rows.append((name, float(gamma), float(rho), exact, report.point_estimate, report.standard_error, tol,
                     "PASS" if ok else "FAIL"))

    for i, rho in enumerate(sorted(config.verify_rho)):
        design = oracle.make_design(config.n, config.n - config.m, rho, seed=seed + i)
        cfg = design.scenario(config.alpha, config.alpha_tilde)
        for j, gamma in enumerate(config.verify_gamma):
            params = oracle.TrueParameters.for_design(design, gamma)
            sub = seed * 1000 + 100 * i + j
            exact = cp_delta(gamma, cfg.rho, scen, quad).cp
            mc_row("coverage", gamma, rho, exact,
                   oracle.simulate_coverage(params, design, cfg, quad, config.reps, sub, config.threads))
            k = kernel_arrays(gamma, cfg, quad)[0][0]
            exact_mean = params.beta[0] - cfg.rho * params.sigma * math.sqrt(cfg.v_theta) * k
            mc_row("pms_mean", gamma, rho, float(exact_mean),
                   oracle.simulate_theta_pms(params, design, cfg, config.reps, sub + 50, config.threads))
            matrix = oracle.sd_delta_matrix_form(params, design, cfg, quad)
            closed = sd_delta(gamma, params.sigma, cfg, quad)
            rel = abs(matrix / closed - 1.0)
            rows.append(("sd_identity", float(gamma), float(rho), closed, matrix, 0.0, 1e-8,
                         "PASS" if rel <= 1e-8 else "FAIL"))

    for i, rho in enumerate(sorted(config.verify_sel_rho)):
        design = oracle.make_design(config.n, config.n - config.m, rho, seed=seed + 500 + i)
        cfg = design.scenario(config.alpha, config.alpha_tilde)
        c_min = min_coverage(cfg.rho, scen, quad, gamma_max=config.search_gamma_max).c_min
        for j, gamma in enumerate(config.verify_sel_gamma):
            params = oracle.TrueParameters.for_design(design, gamma)
            exact = sel_delta(gamma, cfg.rho, c_min, scen, quad).sel
            mc_row("sel", gamma, rho, exact,
                   oracle.simulate_sel(params, design, cfg, quad, c_min, config.reps,
                                       seed * 1000 + 700 + 10 * i + j, config.threads))
    return rows


def _gnuplot(path: Path, csv_name: str, ylabel: str, rhos) -> None:
    lines = [
        "set datafile separator ','",
        f"set xlabel 'gamma'\nset ylabel '{ylabel}'\nset key outside",
        "plot " + ", \\\n     ".join(
            f"'{csv_name}' skip 2 using ($2=={_fmt(float(r))} ? $1 : 1/0):3 with lines title 'rho={r}'" for r in sorted(rhos)
        ),
    ]
    path.write_text("\n".join(lines) + "\n")


def run(config: RunConfig) -> int:
    """Execute one configured run; returns the process exit status."""
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        logger.error("cannot create output directory %s: %s", out, exc)
        return EXIT_IO
    status = 0
    try:
        if config.mode in ("coverage", "both"):
            _write_csv(out / "coverage.csv", config, ["gamma", "rho", "value"], coverage_rows(config))
            if config.plot:
                _gnuplot(out / "coverage.gp", "coverage.csv", "coverage probability", config.rho)
        if config.mode in ("sel", "both"):
            _write_csv(out / "sel.csv", config, ["gamma", "rho", "value", "c_min"], sel_rows(config))
            if config.plot:
                _gnuplot(out / "sel.gp", "sel.csv", "scaled expected length", config.rho)
        if config.mode == "verify":
            rows = verify_rows(config)
            _write_csv(out / "verify.csv", config,
                       ["check", "gamma", "rho", "exact", "estimate", "standard_error", "tolerance", "status"], rows)
            for row in rows:
                logger.info("%-12s gamma=%-6g rho=%-5g exact=%.6f estimate=%.6f  %s", row[0], row[1], row[2], row[3], row[4], row[7])
            if any(row[-1] != "PASS" for row in rows):
                status = EXIT_VERIFY_FAILED
    except QuadratureError as exc:
        logger.error("quadrature failure: %s", exc)
        return EXIT_QUADRATURE
    except OSError as exc:
        logger.error("I/O failure: %s", exc)
        return EXIT_IO
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="smoothci", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat TOML config file")
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    try:
        data = _read_toml(args.config) if args.config else {}
        for key in ("mode", "out", "seed", "threads"):
            value = getattr(args, key)
            if value is not None:
                data[key] = value
        config = RunConfig.from_mapping(data)
    except ConfigError as exc:
        print(f"smoothci: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"smoothci: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
