"""Energy bounds for quantum gates from commuting decompositions of their generators.

A gate ``U = exp(i sum_i lam_i V_i)`` with pairwise-commuting involutory
``V_i`` can be driven term by term; the coefficient multiset ``{lam_i}`` then
sets a lower bound on the field energy needed to reach a target gate error.
"""

from .decomposition import (
    BranchSpec,
    CoefficientMultiset,
    CommutingDecomposition,
    coefficient_multiset,
    entangleability,
    fwht,
    log_branch,
    pauli_decompose,
    pauli_decomposition,
    wht_decompose,
)
from .energetics import (
    CouplingScenario,
    EnergyReport,
    FieldConfig,
    FieldMode,
    Objective,
    energy_report,
    field_energy,
    independent_bound,
    lambda_mean,
    lambda_variance,
    optimize_branch,
    per_term_bound,
    shared_bound,
    synthesize_single_mode,
)
from .error_model import (
    gate_error,
    gate_error_closed_form,
    loschmidt_echo,
    mc_verify,
    perturbed_gate,
)
from .errors import GateEnergyError, NumericalFailure
from .evolution import DriveEnvelope, EvolutionTrace, evolve, figure1_run, renyi_entropy
from .gates import Circuit, GateSpec, circuit_unitary, gate, parse_circuit
from .linalg import SpectralForm, operator_norm, spectral_decompose_unitary

__version__ = "0.1.0"

__all__ = [
    "BranchSpec",
    "Circuit",
    "CoefficientMultiset",
    "CommutingDecomposition",
    "CouplingScenario",
    "DriveEnvelope",
    "EnergyReport",
    "EvolutionTrace",
    "FieldConfig",
    "FieldMode",
    "GateEnergyError",
    "GateSpec",
    "NumericalFailure",
    "Objective",
    "SpectralForm",
    "circuit_unitary",
    "coefficient_multiset",
    "energy_report",
    "entangleability",
    "evolve",
    "field_energy",
    "figure1_run",
    "fwht",
    "gate",
    "gate_error",
    "gate_error_closed_form",
    "independent_bound",
    "lambda_mean",
    "lambda_variance",
    "optimize_branch",
    "log_branch",
    "loschmidt_echo",
    "mc_verify",
    "operator_norm",
    "parse_circuit",
    "pauli_decompose",
    "pauli_decomposition",
    "per_term_bound",
    "perturbed_gate",
    "renyi_entropy",
    "shared_bound",
    "spectral_decompose_unitary",
    "synthesize_single_mode",
    "wht_decompose",
]
