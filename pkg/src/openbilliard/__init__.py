"""Open rectangular quantum billiard coupled to a waveguide: scattering
delay, resonance poles via exterior complex scaling, Gamow wavefunctions."""

from .geometry import BilliardGeometry, Grid, Region, barrier_indicator, build_grid
from .operators import DiscreteOperator, assemble_scaled, assemble_unscaled
from .poles import (
    Classification,
    PoleTrajectory,
    ResonancePole,
    eigs_near,
    find_poles,
    trace_poles,
)
from .scaling import ScalingMap, make_scaling_map, scaled_coefficients
from .scattering import (
    ModeBasis,
    ScatteringPoint,
    mode_basis,
    solve_scattering,
    time_delay,
    unwrap_phase,
)
from .gamow import GamowState, extract_gamow, export_field, mixing_coefficients

__all__ = [
    "BilliardGeometry",
    "Classification",
    "DiscreteOperator",
    "GamowState",
    "Grid",
    "ModeBasis",
    "PoleTrajectory",
    "Region",
    "ResonancePole",
    "ScalingMap",
    "ScatteringPoint",
    "assemble_scaled",
    "assemble_unscaled",
    "barrier_indicator",
    "build_grid",
    "eigs_near",
    "export_field",
    "extract_gamow",
    "find_poles",
    "make_scaling_map",
    "mixing_coefficients",
    "mode_basis",
    "scaled_coefficients",
    "solve_scattering",
    "time_delay",
    "trace_poles",
    "unwrap_phase",
]

__version__ = "0.1.0"
