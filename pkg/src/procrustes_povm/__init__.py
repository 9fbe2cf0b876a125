"""Local-POVM entanglement concentration: qubit algebra, ensemble statistics and spinor wavepacket dynamics."""
__version__ = "0.1.0"

from .distill import (
    DistillError,
    DistillParams,
    POVMConfig,
    config_from_params,
    distill_ghz,
    distill_pair,
    kraus_operators,
    mbqc_resource_estimate,
    params_from_state,
)
from .ensemble import EnsembleSpec, distill_ensemble, sample_ensemble, sweep_grid
from .qubit import PureState, QubitOperator, entropy_of_entanglement, make_state

__all__ = [
    "DistillError", "DistillParams", "EnsembleSpec", "POVMConfig", "PureState", "QubitOperator",
    "config_from_params", "distill_ensemble", "distill_ghz", "distill_pair", "entropy_of_entanglement",
    "kraus_operators", "make_state", "mbqc_resource_estimate", "params_from_state", "sample_ensemble",
    "sweep_grid",
]
