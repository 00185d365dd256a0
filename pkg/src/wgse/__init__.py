"""Spontaneous emission of a slowly moving two-level atom in a rectangular
waveguide: TM-mode kinematics, golden-rule decay rates with center-of-mass
recoil, and resolvent-based survival dynamics.  Natural units throughout
(hbar = c = epsilon_0 = 1)."""

from .coupling import (AtomParams, PROFILE_ZERO_THRESHOLD, coupled_modes,
                       coupling_sq_k, coupling_sq_omega, transverse_profile)
from .geometry import (BelowCutoffError, NATURAL_UNITS, TransverseMode,
                       UnitSystem, WaveguideGeometry, cutoff_frequency,
                       density_factor, dispersion, enumerate_tm_modes,
                       tm_mode, wavenumber_from_frequency)
from .numerics import (BracketError, ConvergenceError, DEFAULT_TOL,
                       ToleranceSpec, extract_order_coefficient,
                       find_root_bracketed, integrate_adaptive,
                       integrate_principal_value)
from .rates import (EmissionReport, ModeEmission, emitted_frequency_at_rest,
                    emitted_frequency_at_rest_first_order, fixed_atom_rate,
                    golden_rule_quadrature_oracle, rate_at_rest_exact,
                    rate_at_rest_first_order, rate_at_rest_paper_first_order,
                    rate_moving_exact, rate_moving_first_order,
                    rate_moving_paper_first_order, resonance_roots_moving,
                    stationary_mode_rate)
from .resolvent import (DynamicsTrace, LevelShift, default_omega_max,
                        level_shift, level_shift_onshell, survival_amplitude,
                        survival_trace)
from .scenario import (Scenario, ScenarioError, load_scenario,
                       parse_scenario, serialize_scenario)

__version__ = "0.1.0"

__all__ = [
    "AtomParams", "PROFILE_ZERO_THRESHOLD", "coupled_modes", "coupling_sq_k",
    "coupling_sq_omega", "transverse_profile",
    "BelowCutoffError", "NATURAL_UNITS", "TransverseMode", "UnitSystem",
    "WaveguideGeometry", "cutoff_frequency", "density_factor", "dispersion",
    "enumerate_tm_modes", "tm_mode", "wavenumber_from_frequency",
    "BracketError", "ConvergenceError", "DEFAULT_TOL", "ToleranceSpec",
    "extract_order_coefficient", "find_root_bracketed", "integrate_adaptive",
    "integrate_principal_value",
    "EmissionReport", "ModeEmission", "emitted_frequency_at_rest",
    "emitted_frequency_at_rest_first_order", "fixed_atom_rate",
    "golden_rule_quadrature_oracle", "rate_at_rest_exact",
    "rate_at_rest_first_order", "rate_at_rest_paper_first_order",
    "rate_moving_exact", "rate_moving_first_order",
    "rate_moving_paper_first_order", "resonance_roots_moving",
    "stationary_mode_rate",
    "DynamicsTrace", "LevelShift", "default_omega_max", "level_shift",
    "level_shift_onshell", "survival_amplitude", "survival_trace",
    "Scenario", "ScenarioError", "load_scenario", "parse_scenario",
    "serialize_scenario",
    "__version__",
]
