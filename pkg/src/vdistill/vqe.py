"""Ansatz circuits, angle sweeps and multi-start optimization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .exceptions import InputError
from .pauli import PauliSum
from .simcore import (
    NOISELESS,
    Circuit,
    Gate,
    NoiseSpec,
    StateVector,
    apply_circuit_noisy,
    apply_circuit_pure,
    make_rng,
)

KINDS = ("reduced-ucc-2q", "hardware-efficient")
SWEEP_POINTS = 51


@dataclass(frozen=True)
class AnsatzSpec:
    """Which circuit family, how wide and how deep.

    ``initial_state`` is the Hartree-Fock bitstring the circuit prepares
    with X gates before any rotation.
    """

    kind: str
    n_qubits: int
    layers: int = 1
    initial_state: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown ansatz kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "reduced-ucc-2q":
            if self.n_qubits != 2:
                raise InputError("reduced-ucc-2q is a two-qubit ansatz")
            object.__setattr__(self, "initial_state", self.initial_state or "01")
            if self.initial_state != "01":
                raise InputError("reduced-ucc-2q starts from |01>")
        else:
            if self.n_qubits < 2 or self.layers < 0:
                raise InputError("hardware-efficient ansatz needs >= 2 qubits and >= 0 layers")
            init = self.initial_state or "0" * self.n_qubits
            if len(init) != self.n_qubits or set(init) - {"0", "1"}:
                raise InputError(f"initial_state {init!r} is not a {self.n_qubits}-bit string")
            object.__setattr__(self, "initial_state", init)

    @property
    def n_params(self) -> int:
        if self.kind == "reduced-ucc-2q":
            return 1
        return 2 * self.n_qubits * (self.layers + 1)


def build_ansatz(spec: AnsatzSpec, params: Sequence[float]) -> Circuit:
    theta = np.asarray(params, dtype=float).reshape(-1)
    if theta.size != spec.n_params:
        raise InputError(f"{spec.kind} with {spec.layers} layer(s) takes {spec.n_params} parameters, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise InputError("parameters must be finite")
    if spec.kind == "reduced-ucc-2q":
        gates = [Gate("X", (1,)), Gate("Ry", (0,), (theta[0],)), Gate("CNOT", (0, 1))]
        return Circuit(2, gates, label="reduced-ucc-2q")
    n = spec.n_qubits
    gates = [Gate("X", (q,)) for q, b in enumerate(spec.initial_state) if b == "1"]
    for layer in range(spec.layers + 1):
        off = 2 * n * layer
        gates += [Gate("Ry", (q,), (theta[off + q],)) for q in range(n)]
        gates += [Gate("Rz", (q,), (theta[off + n + q],)) for q in range(n)]
        if layer < spec.layers:
            # ladder runs from the bottom pair upwards
            gates += [Gate("CNOT", (q, q + 1)) for q in reversed(range(n - 1))]
    return Circuit(n, gates, label=f"hardware-efficient {spec.layers}L")


def raw_energy(h: PauliSum, circuit: Circuit, noise: NoiseSpec = NOISELESS) -> float:
    if noise.is_noiseless:
        return h.expectation(apply_circuit_pure(circuit, StateVector.zeros(circuit.n_qubits)))
    rho = apply_circuit_noisy(circuit, StateVector.zeros(circuit.n_qubits).to_density(), noise)
    return h.expectation(rho)


@dataclass
class OptimizationTrace:
    evaluations: list = field(default_factory=list)
    best: int = -1
    seed: int | None = None
    settings: dict = field(default_factory=dict)
    converged: bool = True

    def record(self, params, raw: float, corrected: float | None = None) -> None:
        self.evaluations.append((tuple(float(x) for x in params), float(raw), corrected))
        if self.best < 0 or raw < self.evaluations[self.best][1]:
            self.best = len(self.evaluations) - 1

    @property
    def best_params(self) -> tuple[float, ...]:
        return self.evaluations[self.best][0]

    @property
    def best_energy(self) -> float:
        return self.evaluations[self.best][1]


def sweep_grid(points: int = SWEEP_POINTS) -> np.ndarray:
    return np.linspace(-np.pi, np.pi, points)


def sweep_1d(h: PauliSum, spec: AnsatzSpec, grid: Sequence[float] | None = None,
             noise: NoiseSpec = NOISELESS,
             corrector: Callable[[Circuit], float] | None = None) -> OptimizationTrace:
    """Raw energy on every grid angle; ``corrector`` is applied at the raw argmin only."""
    if spec.n_params != 1:
        raise InputError("sweep_1d needs a one-parameter ansatz")
    grid = sweep_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InputError("empty angle grid")
    trace = OptimizationTrace(settings={"method": "grid", "points": int(grid.size)})
    for angle in grid:
        trace.record([angle], raw_energy(h, build_ansatz(spec, [angle]), noise))
    if corrector is not None:
        params, raw, _ = trace.evaluations[trace.best]
        trace.evaluations[trace.best] = (params, raw, float(corrector(build_ansatz(spec, params))))
    return trace


def optimize(h: PauliSum, spec: AnsatzSpec, noise: NoiseSpec = NOISELESS, restarts: int = 5,
             seed: int | None = 0, maxiter: int | None = None, xatol: float = 1e-8,
             fatol: float = 1e-10, x0: Sequence[float] | None = None) -> OptimizationTrace:
    """Multi-start Nelder-Mead on the raw energy from seeded uniform starts in [-pi, pi).

    ``x0`` replaces the random starts with a single given point.
    """
    if restarts < 1:
        raise InputError("restarts must be >= 1")
    rng = make_rng(seed)
    k = spec.n_params
    maxiter = maxiter or 4000 * max(k, 1)
    trace = OptimizationTrace(seed=seed, settings={"method": "Nelder-Mead", "restarts": restarts,
                                                   "maxiter": maxiter, "xatol": xatol, "fatol": fatol})
    starts = rng.uniform(-np.pi, np.pi, size=(restarts, k))
    if x0 is not None:
        starts = np.asarray(x0, dtype=float).reshape(1, k)
    if k == 0:
        trace.record([], raw_energy(h, build_ansatz(spec, []), noise))
        return trace
    for x0 in starts:
        res = minimize(lambda x: raw_energy(h, build_ansatz(spec, x), noise), x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "maxfev": maxiter, "xatol": xatol, "fatol": fatol,
                                "adaptive": k > 4})
        trace.record(res.x, res.fun)
        trace.converged = trace.converged and bool(res.success)
    return trace
