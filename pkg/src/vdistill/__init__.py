"""Virtual distillation with low-depth projection circuits, on a dense simulator."""

__version__ = "0.1.0"

from .estimate import (  # noqa: E402
    CorrectedEstimate,
    MeasurementBundle,
    b_gate_estimate,
    corrected_energy,
    corrected_pauli_expectation,
    estimate_s2,
    reconstruct_statistics,
)
from .pauli import PauliString, PauliSum, exact_diagonalize, pauli_decompose  # noqa: E402
from .simcore import Circuit, DensityMatrix, Gate, NoiseSpec, StateVector  # noqa: E402
from .vdcomp import compile_plans, duplicate  # noqa: E402
from .vqe import AnsatzSpec, build_ansatz, optimize, sweep_1d  # noqa: E402

__all__ = [
    "AnsatzSpec", "Circuit", "CorrectedEstimate", "DensityMatrix", "Gate", "MeasurementBundle",
    "NoiseSpec", "PauliString", "PauliSum", "StateVector", "b_gate_estimate", "build_ansatz",
    "compile_plans", "corrected_energy", "corrected_pauli_expectation", "duplicate", "estimate_s2",
    "exact_diagonalize", "optimize", "pauli_decompose", "reconstruct_statistics", "sweep_1d",
]
