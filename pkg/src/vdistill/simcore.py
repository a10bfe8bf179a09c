"""Dense statevector / density-matrix simulation of small circuits.

Basis labels are big-endian: qubit 0 is the most significant bit of the
basis index, so ``|q0 q1 ... q_{n-1}>`` has index ``int("q0q1...", 2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import DimensionError, DomainError, InputError, NumericError

MAX_QUBITS = 12

SINGLE_QUBIT = frozenset({"X", "Y", "Z", "H", "S", "Sdag", "Rx", "Ry", "Rz"})
PARAMETRIC = frozenset({"Rx", "Ry", "Rz"})
GATE_KINDS = SINGLE_QUBIT | {"CNOT", "CZ", "MultiControlZ", "Permute"}

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdag": np.array([[1, 0], [0, -1j]], dtype=complex),
}


def _rotation(kind: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind == "Rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "Ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]])


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit.

    ``qubits`` is ordered: for CNOT it is ``(control, target)``.  For
    ``Permute`` the state of ``qubits[i]`` is moved to ``qubits[params[i]]``
    (``params`` holds integer positions).  ``MultiControlZ`` applies a -1
    phase when every listed qubit is 1.
    """

    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        k, qs = self.kind, self.qubits
        if k not in GATE_KINDS:
            raise InputError(f"unknown gate kind {k!r}")
        if len(set(qs)) != len(qs) or any(q < 0 for q in qs):
            raise InputError(f"{k}: qubit indices must be distinct and non-negative, got {qs}")
        if k in SINGLE_QUBIT and len(qs) != 1:
            raise InputError(f"{k} acts on exactly one qubit")
        if k in ("CNOT", "CZ") and len(qs) != 2:
            raise InputError(f"{k} acts on exactly two qubits")
        if k == "MultiControlZ" and not qs:
            raise InputError("MultiControlZ needs at least one qubit")
        if k in PARAMETRIC and len(self.params) != 1:
            raise InputError(f"{k} takes one angle")
        if k not in PARAMETRIC and k != "Permute" and self.params:
            raise InputError(f"{k} takes no parameters")
        if k == "Permute":
            if sorted(int(p) for p in self.params) != list(range(len(qs))):
                raise InputError("Permute params must be a permutation of range(len(qubits))")
        if not all(math.isfinite(p) for p in self.params):
            raise NumericError(f"{k}: non-finite parameter")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def matrix(self) -> np.ndarray:
        """Dense unitary on ``self.qubits`` (in listed order, big-endian)."""
        k = self.kind
        if k in _FIXED:
            return _FIXED[k].copy()
        if k in PARAMETRIC:
            return _rotation(k, self.params[0])
        if k == "CNOT":
            m = np.eye(4, dtype=complex)
            m[2:, 2:] = _FIXED["X"]
            return m
        if k == "CZ":
            return np.diag([1, 1, 1, -1]).astype(complex)
        if k == "MultiControlZ":
            d = np.ones(2**self.arity, dtype=complex)
            d[-1] = -1
            return np.diag(d)
        # Permute
        a = self.arity
        dest = [int(p) for p in self.params]
        m = np.zeros((2**a, 2**a), dtype=complex)
        for x in range(2**a):
            bits = [(x >> (a - 1 - i)) & 1 for i in range(a)]
            out = [0] * a
            for i, b in enumerate(bits):
                out[dest[i]] = b
            m[int("".join(map(str, out)), 2), x] = 1
        return m


@dataclass(frozen=True)
class Circuit:
    """An ordered gate program on ``n_qubits`` wires."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise DimensionError("a circuit needs at least one qubit")
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise DimensionError(f"gate {g} exceeds circuit width {self.n_qubits}")

    def __add__(self, other: Circuit) -> Circuit:
        if other.n_qubits != self.n_qubits:
            raise DimensionError("cannot concatenate circuits of different widths")
        return Circuit(self.n_qubits, self.gates + other.gates, self.label or other.label)

    def __len__(self):
        return len(self.gates)

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def unitary(self) -> np.ndarray:
        dim = 2**self.n_qubits
        u = np.eye(dim, dtype=complex).reshape((2,) * self.n_qubits + (dim,))
        for g in self.gates:
            u = _apply_to_axes(u, g.matrix(), g.qubits)
        return u.reshape(dim, dim)


@dataclass(frozen=True)
class NoiseSpec:
    """Two-qubit depolarization applied after every two-qubit gate."""

    two_qubit_depolarization: float = 0.0
    per_gate_overrides: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        lam = float(self.two_qubit_depolarization)
        overrides = {int(k): float(v) for k, v in dict(self.per_gate_overrides).items()}
        for value in [lam, *overrides.values()]:
            if not (0.0 <= value <= 1.0):
                raise DomainError(f"depolarization must lie in [0, 1], got {value}")
        object.__setattr__(self, "two_qubit_depolarization", lam)
        object.__setattr__(self, "per_gate_overrides", MappingProxyType(overrides))

    def strength(self, position: int) -> float:
        return self.per_gate_overrides.get(position, self.two_qubit_depolarization)

    @property
    def is_noiseless(self) -> bool:
        return self.two_qubit_depolarization == 0.0 and not any(self.per_gate_overrides.values())


NOISELESS = NoiseSpec()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _width(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    if n > MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if _width(amps.size) != self.n_qubits:
            raise DimensionError(f"{amps.size} amplitudes for {self.n_qubits} qubits")
        if not np.all(np.isfinite(amps)):
            raise NumericError("non-finite amplitude")
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise DomainError(f"state is not normalized (norm {np.linalg.norm(amps)!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def basis(cls, bits: str | int, n_qubits: int | None = None) -> StateVector:
        if isinstance(bits, str):
            n_qubits, index = len(bits), int(bits, 2)
        else:
            index = int(bits)
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1
        return cls(n_qubits, amps)

    @classmethod
    def zeros(cls, n_qubits: int) -> StateVector:
        return cls.basis(0, n_qubits)

    def to_density(self) -> DensityMatrix:
        a = self.amplitudes
        return DensityMatrix(self.n_qubits, np.outer(a, a.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionError("density matrix must be square")
        if _width(rho.shape[0]) != self.n_qubits:
            raise DimensionError(f"{rho.shape} matrix for {self.n_qubits} qubits")
        if not np.all(np.isfinite(rho)):
            raise NumericError("non-finite density matrix entry")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-10:
            raise DomainError(f"density matrix trace is {np.trace(rho).real!r}, not 1")
        if np.linalg.eigvalsh(rho)[0] < -1e-9:
            raise DomainError("density matrix is not positive semidefinite")
        object.__setattr__(self, "entries", _frozen(rho))

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> DensityMatrix:
        d = 2**n_qubits
        return cls(n_qubits, np.eye(d) / d)

    @classmethod
    def _trusted(cls, n_qubits: int, entries: np.ndarray) -> DensityMatrix:
        obj = object.__new__(cls)
        object.__setattr__(obj, "n_qubits", n_qubits)
        object.__setattr__(obj, "entries", _frozen(entries))
        return obj

    def tensor(self, other: DensityMatrix) -> DensityMatrix:
        return DensityMatrix._trusted(self.n_qubits + other.n_qubits,
                                      np.kron(self.entries, other.entries))


def _apply_to_axes(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``op`` (2^k x 2^k) into the given length-2 axes of ``tensor``."""
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _depolarize_pair(rho_t: np.ndarray, n: int, pair: Sequence[int], lam: float) -> np.ndarray:
    """rho -> (1-lam) rho + lam * (I4/4 on ``pair``) (x) Tr_pair(rho), on the 2n-axis tensor."""
    if lam == 0.0:
        return rho_t
    a, b = pair
    rows = [chr(ord("a") + q) for q in range(n)]
    cols = [chr(ord("A") + q) for q in range(n)]
    traced_cols = list(cols)
    traced_cols[a], traced_cols[b] = rows[a], rows[b]
    rest = [q for q in range(n) if q not in (a, b)]
    kept = "".join(rows[q] for q in rest) + "".join(cols[q] for q in rest)
    reduced = np.einsum("".join(rows) + "".join(traced_cols) + "->" + kept, rho_t)
    spec = f"{kept},{rows[a]}{cols[a]},{rows[b]}{cols[b]}->" + "".join(rows) + "".join(cols)
    mixed = np.einsum(spec, reduced, np.eye(2) / 2, np.eye(2) / 2)
    return (1 - lam) * rho_t + lam * mixed


def apply_circuit_pure(circuit: Circuit, state: StateVector) -> StateVector:
    """Unitary evolution of a statevector."""
    if circuit.n_qubits != state.n_qubits:
        raise DimensionError(f"circuit has {circuit.n_qubits} qubits, state has {state.n_qubits}")
    n = state.n_qubits
    psi = np.array(state.amplitudes).reshape((2,) * n)
    for g in circuit.gates:
        psi = _apply_to_axes(psi, g.matrix(), g.qubits)
    psi = psi.reshape(-1)
    if not np.all(np.isfinite(psi)):
        raise NumericError("non-finite amplitude after evolution")
    return StateVector(n, psi / np.linalg.norm(psi))


def apply_circuit_noisy(circuit: Circuit, state: DensityMatrix,
                        noise: NoiseSpec = NOISELESS) -> DensityMatrix:
    """Evolve a density matrix, depolarizing the qubit pair after each two-qubit gate."""
    if circuit.n_qubits != state.n_qubits:
        raise DimensionError(f"circuit has {circuit.n_qubits} qubits, state has {state.n_qubits}")
    if not isinstance(noise, NoiseSpec):
        raise InputError("noise must be a NoiseSpec")
    for pos in noise.per_gate_overrides:
        if not (0 <= pos < len(circuit.gates)) or circuit.gates[pos].arity != 2:
            raise DomainError(f"noise override at position {pos} does not name a two-qubit gate")
    n = state.n_qubits
    rho = np.array(state.entries).reshape((2,) * (2 * n))
    cols = [n + q for q in range(n)]
    for pos, g in enumerate(circuit.gates):
        u = g.matrix()
        rho = _apply_to_axes(rho, u, g.qubits)
        rho = _apply_to_axes(rho, u.conj(), [cols[q] for q in g.qubits])
        if g.arity == 2:
            rho = _depolarize_pair(rho, n, g.qubits, noise.strength(pos))
    dim = 2**n
    rho = rho.reshape(dim, dim)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix._trusted(n, rho)


def measurement_probabilities(state: StateVector | DensityMatrix) -> np.ndarray:
    """Computational-basis outcome probabilities, indexed by big-endian label."""
    if isinstance(state, StateVector):
        p = np.abs(state.amplitudes) ** 2
    elif isinstance(state, DensityMatrix):
        p = np.diagonal(state.entries).real.copy()
    else:
        raise InputError(f"expected StateVector or DensityMatrix, got {type(state).__name__}")
    return _clean_probabilities(p, sum_tol=1e-10)


def _clean_probabilities(p: np.ndarray, sum_tol: float) -> np.ndarray:
    p = np.asarray(p, dtype=float).copy()
    if not np.all(np.isfinite(p)):
        raise NumericError("non-finite probability")
    if np.min(p, initial=0.0) < -1e-12:
        raise DomainError(f"negative probability {p.min()!r}")
    p[p < 0] = 0.0
    if abs(p.sum() - 1) > sum_tol:
        raise DomainError(f"probabilities sum to {p.sum()!r}")
    return p


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2)."""
    m = rho.entries
    # Tr(rho rho) = sum_ij rho_ij rho_ji = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_counts(probs, shots: int, seed: int | np.random.Generator | None = 0) -> dict[int, int]:
    """Multinomial draw of ``shots`` outcomes; returns the non-zero counts."""
    if int(shots) != shots or shots < 1:
        raise DomainError("shots must be a positive integer")
    p = _clean_probabilities(probs, sum_tol=1e-8)
    p = p / p.sum()
    counts = make_rng(seed).multinomial(int(shots), p)
    return {int(i): int(c) for i, c in enumerate(counts) if c}


def counts_to_vector(counts: Mapping[int, int], dim: int) -> np.ndarray:
    v = np.zeros(dim)
    for k, c in counts.items():
        v[int(k)] = c
    return v


def ket(bits: str) -> np.ndarray:
    """Dense basis vector for a big-endian bitstring."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def bits_of(index: int, width: int) -> str:
    return format(index, f"0{width}b")


def random_density_matrix(n_qubits: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random full- or fixed-rank density matrix (Ginibre construction)."""
    d = 2**n_qubits
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ g.conj().T
    return DensityMatrix(n_qubits, rho / np.trace(rho).real)


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    d = 2**n_qubits
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return StateVector(n_qubits, v / np.linalg.norm(v))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out
