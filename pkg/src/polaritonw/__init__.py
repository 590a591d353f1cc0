"""Five-mode parametric polariton emission simulator.

Four coherent pumps on the lower polariton branch share a single idler
channel; pair scattering entangles the four signal modes.  This package
propagates the linear quantum Langevin moments of the five-mode system,
reconstructs the post-selected signal/idler photon density matrix by
coincidence tomography, and extracts the W-projector weight of the
resulting mixture.  A closed-form stationary solution provides an
independent cross-check of every numerical path.
"""

from .cavity import (CavityParams, GeometryError, HopfieldModes,
                     ParametricCoupling, PhaseMatch, PumpDrive, PumpGeometry,
                     hopfield_diagonalize, parabolic_dispersion,
                     parametric_coupling, pump_amplitude, validate_geometry)
from .dynamics import (CorrelatorTables, Drift, Green, Mode, MomentState,
                       NoiseModel, Stability, TwoTimeCorrelators, build_drift,
                       correlator_tables, diffusion_matrix, drift_source,
                       propagate_green, propagate_moments, relax_to_steady,
                       stability_check, stationary_tables, thermal_occupation,
                       two_time_correlators)
from .integrate import IntegrationError, rk45
from .runner import (Axis, ConfigError, NumericError, RunConfig, SweepResult,
                     config_from_dict, emit, load_config, run_single,
                     sweep_fig2, sweep_fig3)
from .steady import (GreenElements, SpectralData, SteadyMoments,
                     entanglement_weight, green_elements, green_matrix,
                     spectral_data, steady_moments)
from .tomography import (DensityMatrix4, ReconstructionError, RhoDiagnostics,
                         WMixture, W_PROJECTOR, fit_w_mixture, reconstruct_rho,
                         trapezoid_weights, validate_rho)

__version__ = "0.1.0"

__all__ = [
    "CavityParams", "GeometryError", "HopfieldModes", "ParametricCoupling",
    "PhaseMatch", "PumpDrive", "PumpGeometry", "hopfield_diagonalize",
    "parabolic_dispersion", "parametric_coupling", "pump_amplitude",
    "validate_geometry",
    "CorrelatorTables", "Drift", "Green", "Mode", "MomentState", "NoiseModel",
    "Stability", "TwoTimeCorrelators", "build_drift", "correlator_tables",
    "diffusion_matrix", "drift_source", "propagate_green", "propagate_moments",
    "relax_to_steady", "stability_check", "stationary_tables",
    "thermal_occupation", "two_time_correlators",
    "IntegrationError", "rk45",
    "Axis", "ConfigError", "NumericError", "RunConfig", "SweepResult",
    "config_from_dict", "emit", "load_config", "run_single", "sweep_fig2",
    "sweep_fig3",
    "GreenElements", "SpectralData", "SteadyMoments", "entanglement_weight",
    "green_elements", "green_matrix", "spectral_data", "steady_moments",
    "DensityMatrix4", "ReconstructionError", "RhoDiagnostics", "WMixture",
    "W_PROJECTOR", "fit_w_mixture", "reconstruct_rho", "trapezoid_weights",
    "validate_rho",
]
