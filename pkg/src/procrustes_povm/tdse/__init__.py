"""Two-component spinor wavepacket dynamics on a 2D grid (staggered leapfrog)."""
from .field import SpinorField, init_gaussian
from .grid import Grid2D, PhysicalParams, TDSEError
from .kernels import BACKEND, BACKENDS, get_backend
from .potentials import (
    PotentialTerm,
    Rect,
    SampledPotential,
    max_stable_dt,
    potential_term,
    sample_potential,
)
from .regions import conditional_spin_state, region_probabilities, spin_fidelity
from .scenarios import calibrate_trim, initial_field, scenario, scenario_grid, target_spinor
from .script import DtPolicy, Stage, StageScript, Trajectory, run_script
from .stepper import step

__all__ = [
    "BACKEND", "BACKENDS", "DtPolicy", "Grid2D", "PhysicalParams", "PotentialTerm", "Rect",
    "SampledPotential", "SpinorField", "Stage", "StageScript", "TDSEError", "Trajectory",
    "calibrate_trim", "conditional_spin_state", "get_backend", "init_gaussian", "initial_field",
    "max_stable_dt", "potential_term", "region_probabilities", "run_script", "sample_potential",
    "scenario", "scenario_grid", "spin_fidelity", "step", "target_spinor",
]
