"""scikit-learn style front ends.

``VirtualDistiller`` is fitted on a Hamiltonian (it compiles the projection
plans) and then transforms circuits into (raw, corrected, purity) rows.
``VQESolver`` is fitted on a Hamiltonian and keeps the optimal parameters.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DimensionError, InputError
from .pauli import PauliSum
from .simcore import Circuit, NoiseSpec
from .vdcomp import compile_plans
from .vqe import AnsatzSpec, build_ansatz, optimize, raw_energy, sweep_1d, sweep_grid


def check_hamiltonian(h) -> PauliSum:
    if isinstance(h, dict):
        h = PauliSum.from_dict(h)
    if not isinstance(h, PauliSum):
        raise InputError(f"expected a PauliSum, got {type(h).__name__}")
    return h


def check_circuits(circuits, n_qubits: int) -> list[Circuit]:
    if isinstance(circuits, Circuit):
        circuits = [circuits]
    out = list(circuits)
    for c in out:
        if not isinstance(c, Circuit):
            raise InputError(f"expected Circuit objects, got {type(c).__name__}")
        if c.n_qubits != n_qubits:
            raise DimensionError(f"circuit has {c.n_qubits} qubits, estimator was fitted on {n_qubits}")
    return out


def check_depolarization(value: float) -> NoiseSpec:
    return NoiseSpec(float(value))


class VirtualDistiller(TransformerMixin, BaseEstimator):
    """Purified energy estimates for state-preparation circuits."""

    def __init__(self, depolarization: float = 0.0, shots: int | str = "exact", seed: int = 0,
                 method: str = "vd", noisy_readout: bool = True):
        self.depolarization = depolarization
        self.shots = shots
        self.seed = seed
        self.method = method
        self.noisy_readout = noisy_readout

    def fit(self, X, y=None):
        from .experiments import METHODS

        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}")
        self.noise_ = check_depolarization(self.depolarization)
        self.hamiltonian_ = check_hamiltonian(X)
        self.plans_ = compile_plans(self.hamiltonian_)
        self.n_qubits_ = self.hamiltonian_.n_qubits
        return self

    def transform(self, X) -> np.ndarray:
        """Columns: raw energy, corrected energy, purity estimate (B-gate values for bgate-hybrid)."""
        from .experiments import evaluate_point

        check_is_fitted(self, "plans_")
        rows = []
        for i, c in enumerate(check_circuits(X, self.n_qubits_)):
            pt = evaluate_point(self.hamiltonian_, c, self.noise_, plans=self.plans_, shots=self.shots,
                                seed=self.seed + i, bgate=self.method == "bgate-hybrid",
                                noisy_readout=self.noisy_readout)
            if self.method == "bgate-hybrid":
                rows.append((pt.raw, pt.bgate, pt.bgate_s2))
            else:
                rows.append((pt.raw, pt.corrected, pt.s2))
        return np.array(rows, dtype=float).reshape(-1, 3)

    def predict(self, X) -> np.ndarray:
        out = self.transform(X)
        return out[:, 0] if self.method == "raw" else out[:, 1]


class VQESolver(BaseEstimator):
    """Minimize the raw energy of an ansatz; 51-angle grid for one parameter."""

    def __init__(self, ansatz: str | None = None, layers: int = 2, initial_state: str | None = None,
                 restarts: int = 4, seed: int = 0, depolarization: float = 0.0, grid_points: int = 51):
        self.ansatz = ansatz
        self.layers = layers
        self.initial_state = initial_state
        self.restarts = restarts
        self.seed = seed
        self.depolarization = depolarization
        self.grid_points = grid_points

    def _spec(self, h: PauliSum) -> AnsatzSpec:
        kind = self.ansatz or ("reduced-ucc-2q" if h.n_qubits == 2 else "hardware-efficient")
        init = self.initial_state or h.meta.get("hartree_fock_state")
        if kind == "reduced-ucc-2q":
            return AnsatzSpec(kind, h.n_qubits)
        return AnsatzSpec(kind, h.n_qubits, self.layers, init)

    def fit(self, X, y=None):
        h = check_hamiltonian(X)
        noise = check_depolarization(self.depolarization)
        spec = self._spec(h)
        if spec.n_params == 1:
            trace = sweep_1d(h, spec, sweep_grid(self.grid_points), noise)
        else:
            trace = optimize(h, spec, noise, restarts=self.restarts, seed=self.seed)
        self.spec_, self.trace_ = spec, trace
        self.params_ = np.array(trace.best_params)
        self.energy_ = trace.best_energy
        self.n_qubits_ = h.n_qubits
        return self

    def circuit(self) -> Circuit:
        check_is_fitted(self, "params_")
        return build_ansatz(self.spec_, self.params_)

    def predict(self, X: PauliSum | Iterable[PauliSum]) -> np.ndarray:
        """Energy of the fitted circuit under each given Hamiltonian."""
        check_is_fitted(self, "params_")
        hs: Sequence = [X] if isinstance(X, (PauliSum, dict)) else list(X)
        noise = check_depolarization(self.depolarization)
        out = []
        for h in hs:
            h = check_hamiltonian(h)
            if h.n_qubits != self.n_qubits_:
                raise DimensionError("Hamiltonian width differs from the fitted one")
            out.append(raw_energy(h, self.circuit(), noise))
        return np.array(out)
