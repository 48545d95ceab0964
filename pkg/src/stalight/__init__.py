"""Semiclassical 1D simulator of stationary light in atomic ensembles."""

from .config import Config, ScenarioDescriptor, parse_config, serialize
from .core import (
    GAMMA,
    ConfigRangeError,
    ConfigValidationError,
    ControlSchedule,
    DivergedIntegrationError,
    DomainError,
    EnsembleConfig,
    FieldState,
    ResolutionError,
    ShapeError,
    SimulationGrid,
    StalightError,
    UnsupportedConfigurationError,
    Waveform,
    integrate_xi,
)
from .eit import effective_mass, evolve_diffusion, mixing_angles
from .hoc import HOCDecayModel, HOCState, run_hoc, step_hoc, truncation_check
from .mbe import BoundaryDrive, Trajectory, run, step_secular
from .phasematch import BeamGeometry, apply_mismatch, residual_mismatch
from .raman import RamanParams, evolve_raman_analytic, evolve_raman_numeric
from .scenarios import run_scenario, sweep
from .spectra import SpectrumResult, eit_window_width, steady_state_response

__version__ = "0.1.0"

__all__ = [
    "Config",
    "ScenarioDescriptor",
    "parse_config",
    "serialize",
    "GAMMA",
    "ConfigRangeError",
    "ConfigValidationError",
    "ControlSchedule",
    "DivergedIntegrationError",
    "DomainError",
    "EnsembleConfig",
    "FieldState",
    "ResolutionError",
    "ShapeError",
    "SimulationGrid",
    "StalightError",
    "UnsupportedConfigurationError",
    "Waveform",
    "integrate_xi",
    "effective_mass",
    "evolve_diffusion",
    "mixing_angles",
    "HOCDecayModel",
    "HOCState",
    "run_hoc",
    "step_hoc",
    "truncation_check",
    "BoundaryDrive",
    "Trajectory",
    "run",
    "step_secular",
    "BeamGeometry",
    "apply_mismatch",
    "residual_mismatch",
    "RamanParams",
    "evolve_raman_analytic",
    "evolve_raman_numeric",
    "run_scenario",
    "sweep",
    "SpectrumResult",
    "eit_window_width",
    "steady_state_response",
]
