import math

import numpy as np
import pytest

from smoothci import QuadratureSpec, ScenarioConfig, cp_delta, k_m, sd_delta, sel_delta
from smoothci.distributions import expected_W
from smoothci.inference import DesignMatrix, fit
from smoothci.oracle import (
    TrueParameters, bootstrap_smooth, cov_star, cov_star_exact, make_design, natural_parameter, sd_delta_matrix_form,
    simulate_coverage, simulate_moments, simulate_sel, simulate_theta_pms, sufficient_statistic, v_eta,
    v_eta_inverse,
)

QUAD = QuadratureSpec()


def random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 40))
    p = int(rng.integers(2, min(n - 1, 8) + 1))
    design = DesignMatrix.from_array(rng.standard_normal((n, p)) * rng.uniform(0.3, 3.0, p))
    cfg = design.scenario(alpha=float(rng.uniform(0.01, 0.2)), alpha_tilde=float(rng.uniform(0.02, 0.3)))
    params = TrueParameters.for_design(
        design, gamma=float(rng.uniform(-6, 6)), sigma=float(rng.uniform(0.2, 4)),
        theta=float(rng.normal()), lam=rng.normal(size=p - 2),
    )
    return design, cfg, params


def test_make_design_hits_targets():
    design = make_design(25, 5, -0.6, v_theta=2.0, v_tau=0.5, seed=3)
    assert design.v_theta == pytest.approx(2.0, rel=1e-12)
    assert design.v_tau == pytest.approx(0.5, rel=1e-12)
    assert design.rho == pytest.approx(-0.6, rel=1e-12)
    np.testing.assert_allclose(design.xtx_inv[2:, 2:], np.eye(3), atol=1e-12)


def test_v_eta_at_zero_beta():
    design = make_design(10, 3, 0.4)
    params = TrueParameters(np.zeros(3), 1.5, design.v_tau)
    V = v_eta(params, design)
    expect = np.zeros((4, 4))
    expect[0, 0] = 2 * 10 * 1.5**2
    expect[1:, 1:] = design.xtx_inv
    np.testing.assert_allclose(V, 1.5**2 * expect, atol=1e-13)
    Vi = v_eta_inverse(params, design)
    inv_expect = np.zeros((4, 4))
    inv_expect[0, 0] = 1 / (2 * 10 * 1.5**4)
    inv_expect[1:, 1:] = design.X.T @ design.X / 1.5**2
    np.testing.assert_allclose(Vi, inv_expect, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_v_eta_inverse_identities(seed):
    design, _, params = random_case(seed)
    V = v_eta(params, design)
    Vi = v_eta_inverse(params, design)
    np.testing.assert_allclose(V, V.T, atol=0)
    assert np.all(np.linalg.eigvalsh(V) > 0)
    scale = np.linalg.cond(V)
    assert np.max(np.abs(V @ Vi - np.eye(V.shape[0]))) < 1e-10 * max(1.0, scale / 1e4)
    np.testing.assert_allclose(Vi, np.linalg.inv(V), rtol=1e-9, atol=1e-9 * np.max(np.abs(Vi)))


def test_natural_parameter_reproduces_likelihood():
    design = make_design(9, 3, 0.3)
    params = TrueParameters(np.array([0.5, -1.0, 2.0]), 1.3, design.v_tau)
    nat = natural_parameter(params, design)
    y = np.random.default_rng(0).standard_normal(9)
    s = sufficient_statistic(design, y)
    loglik = -0.5 * 9 * math.log(2 * math.pi * 1.69) - np.sum((y - design.X @ params.beta) ** 2) / (2 * 1.69)
    exp_family = nat.eta @ s.vector - nat.psi - 0.5 * 9 * math.log(2 * math.pi)
    assert exp_family == pytest.approx(loglik, rel=1e-12)


def test_cov_star_uncorrelated():
    design = make_design(25, 4, 0.0)
    cfg = ScenarioConfig(n=25, m=21, rho=0.0)
    params = TrueParameters.for_design(design, gamma=1.3, sigma=2.0, theta=0.7)
    np.testing.assert_allclose(cov_star(params, design, cfg), 4.0 * np.array([1.4, 1.0, 0.0, 0.0, 0.0]), atol=1e-14)


def test_cov_star_far_gamma():
    design = make_design(25, 4, 0.6, v_theta=2.0, v_tau=3.0)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=200.0, sigma=1.5, theta=-0.4)
    expect = 1.5**2 * np.array([-0.8, 2.0, 0.6 * math.sqrt(6.0), 0.0, 0.0])
    np.testing.assert_allclose(cov_star(params, design, cfg), expect, atol=1e-13)


def test_cov_star_displayed_form_for_block_design():
    design = make_design(25, 5, 0.7, seed=2)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=1.1, sigma=0.9, theta=0.2)
    g = params.gamma
    k, q, h = k_m(g, cfg), None, None
    from smoothci import h_m, q_m
    q, h = q_m(g, cfg), h_m(g, cfg)
    s = 0.9
    displayed = s**2 * np.array([
        2 * 0.2 - 0.7 * s * (g * q + k + h), 1 - 0.49 * q, 0.7 * (1 - q), 0.0, 0.0, 0.0,
    ])
    np.testing.assert_allclose(cov_star(params, design, cfg), displayed, atol=1e-13)


def test_sd_matrix_form_uncorrelated():
    design = make_design(25, 3, 0.0, v_theta=1.7)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=0.9, sigma=1.4, theta=3.0)
    assert sd_delta_matrix_form(params, design, cfg) == pytest.approx(1.4 * math.sqrt(1.7), rel=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_matrix_form_matches_closed_form(seed):
    design, cfg, params = random_case(seed)
    closed = sd_delta(params.gamma, params.sigma, cfg)
    assert sd_delta_matrix_form(params, design, cfg) == pytest.approx(closed, rel=1e-8)


def test_matrix_form_spot_point():
    design = make_design(25, 22, 0.7, seed=1)
    cfg = design.scenario()
    assert cfg.m == 3
    params = TrueParameters.for_design(design, gamma=1.0, sigma=1.0)
    assert sd_delta_matrix_form(params, design, cfg) == pytest.approx(sd_delta(1.0, 1.0, cfg), rel=1e-8)


def test_matrix_form_far_gamma():
    design = make_design(25, 22, 0.9)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=25.0, sigma=1.0)
    assert sd_delta_matrix_form(params, design, cfg) == pytest.approx(1.0, abs=1e-6)


@pytest.fixture(scope="module")
def moments_case():
    design = make_design(8, 3, 0.6, seed=4)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=1.2, sigma=1.1, theta=0.5, lam=[0.8])
    return design, cfg, params, simulate_moments(params, design, cfg, reps=1_000_000, seed=0)


def test_v_eta_monte_carlo(moments_case):
    design, _, params, (cov_s, cov_s_se, _, _) = moments_case
    assert np.all(np.abs(cov_s - v_eta(params, design)) <= 3 * cov_s_se)


def test_cov_star_monte_carlo(moments_case):
    design, cfg, params, (_, _, cross, cross_se) = moments_case
    exact = cov_star_exact(params, design, cfg)
    assert np.all(np.abs(cross - exact) <= 3 * cross_se)
    # the displayed beta_hat block agrees with simulation
    displayed = cov_star(params, design, cfg)
    assert np.all(np.abs(cross[1:] - displayed[1:]) <= 3 * cross_se[1:])


def test_displayed_cov_star_omits_residual_term(moments_case):
    # the displayed y'y entry drops the rho sigma^3 sqrt(v_theta) h_m(gamma) contribution
    # of the residual sum of squares, a gap far beyond Monte Carlo error here
    design, cfg, params, (_, _, cross, cross_se) = moments_case
    displayed = cov_star(params, design, cfg)
    from smoothci import h_m
    gap = params.sigma**3 * cfg.rho * math.sqrt(cfg.v_theta) * h_m(params.gamma, cfg)
    assert cov_star_exact(params, design, cfg)[0] - displayed[0] == pytest.approx(gap, rel=1e-12)
    assert abs(cross[0] - displayed[0]) > 20 * cross_se[0]


def test_pms_mean_identity():
    design = make_design(25, 24, 0.7, seed=6)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=1.5, sigma=1.0, theta=0.0)
    report = simulate_theta_pms(params, design, cfg, reps=200_000, seed=3)
    exact = -0.7 * k_m(1.5, cfg)
    assert abs(report.point_estimate - exact) < 3 * report.standard_error


def test_coverage_simulation_uncorrelated():
    design = make_design(25, 24, 0.0)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=2.0)
    report = simulate_coverage(params, design, cfg, reps=100_000, seed=5)
    assert abs(report.point_estimate - 0.95) < 3 * math.sqrt(0.95 * 0.05 / 100_000)


def test_coverage_simulation_deterministic_and_thread_invariant():
    design = make_design(25, 24, 0.9)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=3.0)
    a = simulate_coverage(params, design, cfg, reps=50_000, seed=17, threads=1)
    b = simulate_coverage(params, design, cfg, reps=50_000, seed=17, threads=1)
    c = simulate_coverage(params, design, cfg, reps=50_000, seed=17, threads=3)
    assert a == b == c
    d = simulate_coverage(params, design, cfg, reps=50_000, seed=18)
    assert d.point_estimate != a.point_estimate


def test_coverage_simulation_agrees():
    design = make_design(25, 24, 0.9)
    cfg = design.scenario()
    params = TrueParameters.for_design(design, gamma=3.0)
    report = simulate_coverage(params, design, cfg, reps=100_000, seed=2, threads=4)
    exact = cp_delta(3.0, 0.9, cfg).cp
    assert abs(report.point_estimate - exact) < 3 * math.sqrt(exact * (1 - exact) / 100_000)


def test_sel_simulation_uncorrelated_is_exactly_one():
    design = make_design(25, 24, 0.0)
    cfg = design.scenario()
    report = simulate_sel(TrueParameters.for_design(design, gamma=1.0), design, cfg, c_min=0.95, reps=5000)
    assert report.point_estimate == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.0, 25.0])
def test_sel_simulation_agrees(gamma):
    design = make_design(25, 24, 0.9)
    cfg = design.scenario()
    c_min = 0.9416594534
    report = simulate_sel(TrueParameters.for_design(design, gamma=gamma), design, cfg, c_min=c_min,
                          reps=100_000, seed=4, threads=4)
    exact = sel_delta(gamma, 0.9, c_min, cfg).sel
    assert abs(report.point_estimate - exact) < 3 * report.standard_error


def test_sel_simulation_far_limit_more_dof():
    design = make_design(25, 22, 0.9)
    cfg = design.scenario()
    from smoothci.sel import sel_limit
    report = simulate_sel(TrueParameters.for_design(design, gamma=25.0), design, cfg, c_min=0.94,
                          reps=100_000, seed=8)
    assert abs(report.point_estimate - sel_limit(0.94, cfg)) < 3 * report.standard_error + 1e-12


def test_bootstrap_reproducible():
    design = make_design(25, 24, 0.5)
    cfg = design.scenario()
    f = fit(design, np.random.default_rng(1).standard_normal(25))
    a = bootstrap_smooth(f, design, cfg, B=30_000, seed=2)
    b = bootstrap_smooth(f, design, cfg, B=30_000, seed=2, threads=2)
    assert a == b


@pytest.mark.parametrize("m", [1, 3, 10])
def test_chi_sampler_mean(m):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(m)))
    w = np.sqrt(rng.chisquare(m, 400_000) / m)
    assert abs(w.mean() - expected_W(m)) < 3 * w.std(ddof=1) / math.sqrt(w.size)


def test_replication_floor():
    design = make_design(25, 24, 0.5)
    with pytest.raises(ValueError):
        simulate_coverage(TrueParameters.for_design(design, 0.0), design, design.scenario(), reps=10)
