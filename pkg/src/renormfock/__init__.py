"""Wave-function renormalization on truncated bosonic Fock spaces.

Numerical laboratory for singular dressing transformations: truncated Fock
bases and second quantization (fock), momentum grids and form factors
(modes), dressed metrics and transfers (dressing), the exactly solvable
scalar-source model (vhm), double operator integrals (doi), the spin-boson
model with matrix-valued dressings (spinboson), fixed-momentum fiber
Hamiltonians with self-energy subtraction (nelson), resolvent-convergence
diagnostics (convergence), and a config-driven sweep runner (cli).
"""

from .fock import (FockBasis, FockOperator, annihilator, coherent_state,
                   creator, displacement, embedding, enumerate_basis,
                   exp_tail, exponential_vector, number_operator,
                   second_quantization)
from .modes import (FormFactorSpec, ModeSet, gross_config, linear_grid,
                    log_grid, sample_form_factor, self_energy,
                    vhm_ground_config)
from .dressing import (RenormMetric, dress_lower, interacting_field,
                       mollified_inner_check, renorm_metric,
                       representation_distance, transfer)

__all__ = [
    "FockBasis", "FockOperator", "annihilator", "coherent_state", "creator",
    "displacement", "embedding", "enumerate_basis", "exp_tail",
    "exponential_vector", "number_operator", "second_quantization",
    "FormFactorSpec", "ModeSet", "gross_config", "linear_grid", "log_grid",
    "sample_form_factor", "self_energy", "vhm_ground_config",
    "RenormMetric", "dress_lower", "interacting_field",
    "mollified_inner_check", "renorm_metric", "representation_distance",
    "transfer",
]

__version__ = "0.1.0"
