"""Irregularized Hopf equation: delta-spike simulations and Rankine-Hugoniot tools."""

from .core import FieldState, Grid1D, NonFiniteError, ValidationError, make_grid, sample, total_mass
from .flux import FluxSpec, IrregularizationSpec, RegularizationSpec, irregularization_factor, modified_flux
from .solver import SchemeConfig, SimulationAborted, SpectralFilter, Trajectory, run
from .rh import RiemannData, ShockBalance, balance_at, classical_shock_speed, delta_mass_rate
from .systems import SystemSpec, run_system
from .analysis import SpikeReport, asymptotic_profile, detect_spike, zero_crossings
from .config import RunConfig, load, preset

__all__ = [
    "FieldState", "Grid1D", "NonFiniteError", "ValidationError", "make_grid", "sample", "total_mass",
    "FluxSpec", "IrregularizationSpec", "RegularizationSpec", "irregularization_factor", "modified_flux",
    "SchemeConfig", "SimulationAborted", "SpectralFilter", "Trajectory", "run",
    "RiemannData", "ShockBalance", "balance_at", "classical_shock_speed", "delta_mass_rate",
    "SystemSpec", "run_system",
    "SpikeReport", "asymptotic_profile", "detect_spike", "zero_crossings",
    "RunConfig", "load", "preset",
]
