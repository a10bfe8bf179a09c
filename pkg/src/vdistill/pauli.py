"""Pauli strings, Hamiltonians and the dense diagonalization oracle."""
from __future__ import annotations

import itertools
import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .exceptions import CapacityError, DimensionError, DomainError, InputError
from .simcore import Circuit, DensityMatrix, Gate, StateVector

LETTERS = "IXYZ"
PRUNE = 1e-12
MAX_DIAG_QUBITS = 10

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis; letter ``i`` acts on qubit ``i``."""

    letters: str

    def __post_init__(self):
        s = str(self.letters).upper()
        if not s or set(s) - set(LETTERS):
            raise InputError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", s)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def __str__(self):
        return self.letters

    def __len__(self):
        return len(self.letters)

    @property
    def is_diagonal(self) -> bool:
        return set(self.letters) <= {"I", "Z"}

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    @property
    def weight(self) -> int:
        return len(self.support)

    def z_mask(self) -> int:
        """Support as a big-endian bit mask."""
        n = self.n_qubits
        return sum(1 << (n - 1 - i) for i in self.support)

    def diagonalized(self) -> PauliString:
        """The I/Z string this one becomes after :func:`basis_rotation_circuit`."""
        return PauliString("".join("I" if c == "I" else "Z" for c in self.letters))

    def basis_key(self) -> str:
        """Measurement basis per qubit (I and Z share the computational basis)."""
        return "".join("Z" if c == "I" else c for c in self.letters)

    def diagonal(self) -> np.ndarray:
        """Eigenvalue of a diagonal string on every basis index."""
        if not self.is_diagonal:
            raise DomainError(f"{self} is not diagonal")
        idx = np.arange(2**self.n_qubits)
        parity = np.zeros_like(idx)
        m = self.z_mask()
        for b in range(self.n_qubits):
            if (m >> b) & 1:
                parity ^= (idx >> b) & 1
        return 1 - 2 * parity


def string_matrix(p: PauliString | str) -> np.ndarray:
    """Dense matrix of a Pauli string (big-endian Kronecker order)."""
    p = PauliString(p) if isinstance(p, str) else p
    out = np.array([[1.0 + 0j]])
    for c in p.letters:
        out = np.kron(out, _SINGLE[c])
    return out


@dataclass(frozen=True)
class PauliSum:
    """A real linear combination of Pauli strings plus a constant offset.

    Duplicate strings are merged and an all-identity string is folded into
    ``constant`` so that the constant always carries the full energy shift.
    """

    terms: tuple[tuple[float, PauliString], ...]
    constant: float = 0.0
    meta: Mapping = field(default_factory=dict, compare=False)
    n_qubits: int | None = None

    def __post_init__(self):
        merged: dict[PauliString, float] = {}
        const = float(self.constant)
        widths = set() if self.n_qubits is None else {int(self.n_qubits)}
        for coeff, s in self.terms:
            s = PauliString(s) if isinstance(s, str) else s
            c = complex(coeff)
            if abs(c.imag) > 1e-12:
                raise DomainError(f"coefficient of {s} is not real; the sum would not be Hermitian")
            widths.add(s.n_qubits)
            if s.is_identity:
                const += c.real
            else:
                merged[s] = merged.get(s, 0.0) + c.real
        if len(widths) > 1:
            raise DimensionError(f"Pauli strings of mixed width {sorted(widths)}")
        if not widths:
            raise InputError("an empty PauliSum needs an explicit n_qubits")
        terms = tuple((c, s) for s, c in sorted(merged.items()) if abs(c) >= PRUNE)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "constant", const)
        object.__setattr__(self, "n_qubits", widths.pop())
        object.__setattr__(self, "meta", dict(self.meta))

    @classmethod
    def from_dict(cls, coeffs: Mapping[str, float], constant: float = 0.0, **kw) -> PauliSum:
        return cls(tuple((c, PauliString(s)) for s, c in coeffs.items()), constant, **kw)

    def to_dict(self) -> dict[str, float]:
        return {s.letters: c for c, s in self.terms}

    def __len__(self):
        return len(self.terms)

    @cached_property
    def _dense(self) -> np.ndarray:
        d = 2**self.n_qubits
        m = self.constant * np.eye(d, dtype=complex)
        for c, s in self.terms:
            m += c * string_matrix(s)
        m.flags.writeable = False
        return m

    def matrix(self) -> np.ndarray:
        return self._dense.copy()

    def expectation(self, state: StateVector | DensityMatrix) -> float:
        if isinstance(state, StateVector):
            a = state.amplitudes
            return float(np.vdot(a, self._dense @ a).real)
        return float(np.einsum("ij,ji->", self._dense, state.entries).real)

    def groups(self) -> dict[str, list[tuple[float, PauliString]]]:
        """Terms keyed by the measurement basis they need, in a stable order."""
        out: dict[str, list[tuple[float, PauliString]]] = {}
        for c, s in self.terms:
            out.setdefault(s.basis_key(), []).append((c, s))
        return dict(sorted(out.items(), key=lambda kv: (kv[0].replace("Z", "0") != "0" * self.n_qubits, kv[0])))


@dataclass(frozen=True)
class DiagonalizationResult:
    eigenvalues: np.ndarray
    ground_energy: float
    ground_state: np.ndarray | None = field(default=None, compare=False)


def basis_rotation_circuit(p: PauliString | str) -> Circuit:
    """Single-qubit rotations R with R P R^dagger diagonal.

    X becomes Z under H; Y becomes Z under Sdag followed by H.
    """
    p = PauliString(p) if isinstance(p, str) else p
    gates = []
    for q, c in enumerate(p.letters):
        if c == "X":
            gates.append(Gate("H", (q,)))
        elif c == "Y":
            gates += [Gate("Sdag", (q,)), Gate("H", (q,))]
    return Circuit(p.n_qubits, gates, label=f"rotate {p}")


def basis_circuit(key: str) -> Circuit:
    """Rotation for a measurement-basis key such as ``"XZY"``."""
    return basis_rotation_circuit(key.replace("Z", "I"))


def eigenvalue_of_outcome(p: PauliString | str, outcome: str | int) -> int:
    """+1/-1 eigenvalue of a diagonal string on a computational outcome."""
    p = PauliString(p) if isinstance(p, str) else p
    if not p.is_diagonal:
        raise DomainError(f"{p} is not diagonal; rotate it first")
    if isinstance(outcome, str):
        if len(outcome) != p.n_qubits:
            raise DimensionError("outcome width differs from string width")
        bits = outcome
    else:
        bits = format(int(outcome), f"0{p.n_qubits}b")
    flips = sum(bits[i] == "1" for i in p.support)
    return -1 if flips % 2 else 1


def pauli_decompose(observable: np.ndarray, prune: float = PRUNE) -> PauliSum:
    """Expand a Hermitian matrix in the Pauli basis: a_i = Tr(P_i O) / 2^k.

    The identity component lands in ``constant``.
    """
    o = np.asarray(observable, dtype=complex)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise DomainError("observable must be a square matrix")
    dim = o.shape[0]
    k = int(round(math.log2(dim))) if dim > 0 else -1
    if k < 1 or 2**k != dim:
        raise DomainError(f"dimension {dim} is not a power of two")
    if np.max(np.abs(o - o.conj().T)) > 1e-10:
        raise DomainError("observable is not Hermitian")
    idx = np.arange(dim)
    bits = [(idx >> (k - 1 - q)) & 1 for q in range(k)]
    coeffs = {}
    for letters in itertools.product(LETTERS, repeat=k):
        flip = 0
        phase = np.ones(dim, dtype=complex)
        for q, c in enumerate(letters):
            if c in "XY":
                flip |= 1 << (k - 1 - q)
            if c == "Z":
                phase *= 1 - 2 * bits[q]
            elif c == "Y":
                # Y|0> = i|1>, Y|1> = -i|0>
                phase *= 1j * (1 - 2 * bits[q])
        # Tr(P O) = sum_y <y xor flip|P|y> O[y, y xor flip]
        val = np.sum(phase * o[idx, idx ^ flip]) / dim
        if abs(val) >= prune:
            coeffs["".join(letters)] = val.real
    return PauliSum(tuple((c, PauliString(s)) for s, c in coeffs.items()), n_qubits=k)


def exact_diagonalize(h: PauliSum) -> DiagonalizationResult:
    if h.n_qubits > MAX_DIAG_QUBITS:
        raise CapacityError(f"{h.n_qubits} qubits exceeds dense diagonalization limit {MAX_DIAG_QUBITS}")
    w, v = np.linalg.eigh(h.matrix())
    return DiagonalizationResult(eigenvalues=w, ground_energy=float(w[0]), ground_state=v[:, 0])


def all_strings(n: int) -> Iterable[PauliString]:
    for letters in itertools.product(LETTERS, repeat=n):
        yield PauliString("".join(letters))
