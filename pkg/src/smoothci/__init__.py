"""Exact coverage and expected length of confidence intervals centred on bootstrap smoothed estimators.

Scenario: two nested linear regression models with unknown error variance and
model selection by a preliminary t-test.
"""

from ._backend import BACKEND
from .config import QuadratureSpec, ScenarioConfig
from .coverage import CoveragePoint, MinCoverageResult, cp_delta, ell_u, min_coverage, psi
from .distributions import expected_W, f_W, normal_cdf, normal_pdf, t_quantile
from .inference import FittedModel, Interval, fit, j_delta, theta_pms, theta_tilde, usual_interval
from .kernels import KernelValues, QuadratureError, h_m, k_m, q_m, r_delta, sd_delta
from .sel import SelPoint, sel_curve, sel_delta

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "QuadratureSpec", "ScenarioConfig",
    "CoveragePoint", "MinCoverageResult", "cp_delta", "ell_u", "min_coverage", "psi",
    "expected_W", "f_W", "normal_cdf", "normal_pdf", "t_quantile",
    "FittedModel", "Interval", "fit", "j_delta", "theta_pms", "theta_tilde", "usual_interval",
    "KernelValues", "QuadratureError", "h_m", "k_m", "q_m", "r_delta", "sd_delta",
    "SelPoint", "sel_curve", "sel_delta",
]
