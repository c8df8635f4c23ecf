"""Safety-certified LQ tracking for marine vessels under stochastic disturbance.

Layers, bottom up: small dense linear algebra (``linalg``), vessel error
kinematics (``vessel``), tracking and compensation control laws
(``control``), barrier certificates and pointwise generator oracles
(``safety``), seeded noise streams (``rng``), the Euler-Maruyama engine with
compiled/numpy backends (``engine``, ``backend``), ensemble estimation
(``montecarlo``), scenario files (``scenario``), and the command line
(``cli``).
"""

from .backend import available_backends, default_backend_name
from .control import (MODES, CompensatorConfig, LqrDesign, design_lqr,
                      total_controller, u_com, u_nlc, u_tra)
from .engine import NumericalBlowupError, SamplePath, em_step, simulate_path
from .montecarlo import McConfig, McReport, compare_modes, estimate_safety, wilson_interval
from .rng import RngStream, normal_increments
from .safety import (InfeasibleError, SafetyCertificate, Zcbf, build_certificate,
                     check_zcbf_on_shell, compute_b, compute_b_plus_projection,
                     compute_b_plus_rigorous, feasibility_margin, generator_h,
                     h, region_of, required_gap, safety_prob_lb)
from .scenario import PRESETS, Scenario, ScenarioError, load_scenario, preset_scenario
from .vessel import VesselParams, drift, error_from_poses, global_from_error, input_gain, linearize

__version__ = "0.1.0"

__all__ = [
    "MODES", "available_backends", "default_backend_name",
    "CompensatorConfig", "LqrDesign", "design_lqr", "total_controller",
    "u_com", "u_nlc", "u_tra",
    "NumericalBlowupError", "SamplePath", "em_step", "simulate_path",
    "McConfig", "McReport", "compare_modes", "estimate_safety", "wilson_interval",
    "RngStream", "normal_increments",
    "InfeasibleError", "SafetyCertificate", "Zcbf", "build_certificate",
    "check_zcbf_on_shell", "compute_b", "compute_b_plus_projection",
    "compute_b_plus_rigorous", "feasibility_margin", "generator_h", "h",
    "region_of", "required_gap", "safety_prob_lb",
    "PRESETS", "Scenario", "ScenarioError", "load_scenario", "preset_scenario",
    "VesselParams", "drift", "error_from_poses", "global_from_error",
    "input_gain", "linearize",
    "__version__",
]
