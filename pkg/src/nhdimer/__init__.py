"""Gain-saturated two-cavity dimer with phase-non-reciprocal hopping.

Semiclassical simulation and analysis toolkit: transmission spectra,
stability phase diagrams, limit cycles, injection locking, and the
calibration fits that map device settings onto model parameters.
"""

from .analytics import (LcSolution, NormalModeRates, lc_amplitude,
                        lc_convergence_rate, lc_frequency, lc_solution,
                        normal_mode_rates, normal_modes)
from .calibration import (GainProfile, HashMap, S11FitResult,
                          gain_profile_fit, hashmap_build, hashmap_lookup,
                          s11_fit, s11_model)
from .config import RunConfig, load_config
from .errors import (ConfigError, FitFailed, IntegrationError, NhdimerError,
                     NonFiniteState, RangeError, StepUnderflow)
from .experiments import (SweepGrid, drive_frequency_sweep, lc_phase_diagram,
                          lorentzian_fit, peak_count, sync_power_contours,
                          transmission_sweep)
from .integrator import IntegratorConfig, Trajectory, integrate
from .model import (coherent_coupling_f, drive_strength, dynamical_matrix,
                    hopping_j, kappa_eff, linear_equilibrium, linear_matrix,
                    rhs)
from .params import (FieldState, OperatingPoint, PhysicalParams,
                     default_params, symmetric_params)
from .spectral import (LcObservation, Spectrum, dc_component, dft,
                       lc_extract, photons_to_dbm, s21_db, spectrum_of)
from .stability import (StabilityReport, boundary_curve, eig2, is_stable,
                        kappa_0, stability_agreement, threshold_gain,
                        write_boundary_csv)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FieldState", "FitFailed", "GainProfile", "HashMap",
    "IntegrationError", "IntegratorConfig", "LcObservation", "LcSolution",
    "NhdimerError", "NonFiniteState", "NormalModeRates", "OperatingPoint",
    "PhysicalParams", "RangeError", "RunConfig", "S11FitResult",
    "SweepGrid", "Spectrum", "StabilityReport", "StepUnderflow",
    "Trajectory", "boundary_curve", "coherent_coupling_f", "dc_component",
    "default_params", "dft", "drive_frequency_sweep", "drive_strength",
    "dynamical_matrix", "eig2", "gain_profile_fit", "hashmap_build",
    "hashmap_lookup", "hopping_j", "integrate", "is_stable", "kappa_0",
    "kappa_eff",
    "lc_amplitude", "lc_convergence_rate", "lc_extract", "lc_frequency",
    "lc_phase_diagram", "lc_solution", "linear_equilibrium", "linear_matrix",
    "load_config", "lorentzian_fit", "normal_mode_rates", "normal_modes",
    "peak_count", "photons_to_dbm", "rhs", "s11_fit", "s11_model", "s21_db",
    "spectrum_of", "stability_agreement", "symmetric_params",
    "sync_power_contours", "threshold_gain", "transmission_sweep",
    "write_boundary_csv",
]
