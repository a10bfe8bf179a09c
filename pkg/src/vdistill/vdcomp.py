"""Compiler for duplicate-circuit virtual distillation.

Qubit ``i`` of the original circuit is paired with qubit ``i + n`` of the
copy.  A basis state ``x`` of the doubled register is written ``(a, c)``
with ``a`` the first ``n`` bits and ``c`` the last ``n``; the swap operator
maps it to ``(c, a)`` and its *mask* is ``a XOR c``.

Every outcome-to-eigenvector map here is obtained by conjugating basis
vectors through the circuit unitary, never written down by hand.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .exceptions import CapacityError, DomainError, InputError
from .pauli import PauliString, PauliSum
from .simcore import Circuit, Gate

PAIR_LABELS = ("S+", "A+", "S-", "A-")
_BELL = {
    "S+": np.array([1, 0, 0, 1]) / math.sqrt(2),
    "A+": np.array([0, 1, 1, 0]) / math.sqrt(2),
    "S-": np.array([1, 0, 0, -1]) / math.sqrt(2),
    "A-": np.array([0, 1, -1, 0]) / math.sqrt(2),
}
MAX_MASK_QUBITS = 6


# --------------------------------------------------------------------------
# duplication and the swap operator


@dataclass(frozen=True)
class DuplicatedCircuit:
    base: Circuit
    doubled: Circuit

    @property
    def n(self) -> int:
        return self.base.n_qubits

    @property
    def pairing(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, i + self.n) for i in range(self.n))


def duplicate(base: Circuit) -> DuplicatedCircuit:
    """Run ``base`` on qubits 0..n-1 and, gate for gate, on n..2n-1."""
    n = base.n_qubits
    shifted = [Gate(g.kind, tuple(q + n for q in g.qubits), g.params) for g in base.gates]
    doubled = Circuit(2 * n, base.gates + tuple(shifted), label=f"{base.label} x2".strip())
    return DuplicatedCircuit(base, doubled)


def split(x: int, n: int) -> tuple[int, int]:
    """Halves (a, c) of a 2n-bit basis index."""
    return x >> n, x & ((1 << n) - 1)


def swap_index(x: int, n: int) -> int:
    a, c = split(x, n)
    return (c << n) | a


@dataclass(frozen=True)
class SwapOperator:
    n: int

    @functools.cached_property
    def permutation(self) -> np.ndarray:
        idx = np.arange(4**self.n)
        mask = (1 << self.n) - 1
        return ((idx & mask) << self.n) | (idx >> self.n)

    def matrix(self) -> np.ndarray:
        d = 4**self.n
        m = np.zeros((d, d))
        m[self.permutation, np.arange(d)] = 1
        return m

    def as_gate(self) -> Gate:
        n = self.n
        return Gate("Permute", tuple(range(2 * n)), tuple((i + n) % (2 * n) for i in range(2 * n)))


@dataclass(frozen=True)
class BasisClassification:
    """Swap-invariant vs paired basis states of a 2n-qubit register."""

    n: int
    invariant: np.ndarray
    partner: np.ndarray
    mask: np.ndarray
    classes: Mapping[int, tuple[tuple[int, int], ...]]

    @property
    def invariant_states(self) -> np.ndarray:
        return np.flatnonzero(self.invariant)

    def pairs(self, mask: int | None = None) -> tuple[tuple[int, int], ...]:
        if mask is not None:
            return self.classes[mask]
        return tuple(p for m in sorted(self.classes) for p in self.classes[m])


@functools.lru_cache(maxsize=None)
def classify_basis(n: int) -> BasisClassification:
    if n < 1:
        raise DomainError("n must be at least 1")
    idx = np.arange(4**n)
    a, c = idx >> n, idx & ((1 << n) - 1)
    partner = (c << n) | a
    mask = a ^ c
    classes: dict[int, list[tuple[int, int]]] = {}
    for x in idx[(mask != 0) & (idx < partner)]:
        classes.setdefault(int(mask[x]), []).append((int(x), int(partner[x])))
    for arr in (partner, mask):
        arr.flags.writeable = False
    inv = mask == 0
    inv.flags.writeable = False
    return BasisClassification(
        n=n, invariant=inv, partner=partner, mask=mask,
        classes=MappingProxyType({m: tuple(v) for m, v in sorted(classes.items())}),
    )


def mask_bits(mask: int, n: int) -> str:
    return format(mask, f"0{n}b")


def parse_mask(mask: int | str, n: int) -> int:
    if isinstance(mask, str):
        if len(mask) != n or set(mask) - {"0", "1"}:
            raise DomainError(f"mask {mask!r} is not an {n}-bit string")
        mask = int(mask, 2)
    mask = int(mask)
    if not 0 < mask < 2**n:
        raise DomainError(f"mask must be a nonzero {n}-bit pattern, got {mask}")
    return mask


# --------------------------------------------------------------------------
# plans and recipes


@dataclass(frozen=True)
class ReconstructionRecipe:
    """Signed combination  sum_x w_x P_comp(x) + sum_z c_z P_proj(z)."""

    target: str
    n: int
    computational_part: Mapping[int, float]
    signed_part: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "computational_part", MappingProxyType(dict(self.computational_part)))
        object.__setattr__(self, "signed_part", MappingProxyType(dict(self.signed_part)))
        if any(c not in (-1, 1) for c in self.signed_part.values()):
            raise DomainError("projection coefficients must be +1 or -1")

    def evaluate(self, p_comp: np.ndarray | None, p_proj: np.ndarray) -> float:
        total = 0.0
        if self.computational_part:
            if p_comp is None:
                raise InputError(f"recipe {self.target} needs the computational distribution")
            total += sum(w * p_comp[x] for x, w in self.computational_part.items())
        total += sum(c * p_proj[z] for z, c in self.signed_part.items())
        return float(total)

    def as_json(self) -> dict:
        w = 2 * self.n
        return {
            "target": self.target,
            "convention": "big-endian",
            "computational": {format(x, f"0{w}b"): v for x, v in sorted(self.computational_part.items())},
            "projection": {format(z, f"0{w}b"): v for z, v in sorted(self.signed_part.items())},
        }


@dataclass(frozen=True)
class ProjectionPlan:
    """An entangling projection on the doubled register.

    ``kind`` is ``"mask"``, ``"s2"`` or ``"pauli"``.  For mask plans
    ``outcome_map[z] = (x, s)`` means outcome ``z`` projects onto
    ``(|x> + s|S2 x>)/sqrt2`` with ``x`` the lower-index member of the pair;
    outcomes absent from the map land on vectors that are not swap
    eigenvectors of that class and are ignored.  For the pairwise plans
    ``outcome_map[z]`` is the tuple of per-pair labels.
    """

    kind: str
    n: int
    circuit: Circuit
    outcome_map: Mapping
    mask: int | None = None
    recipe: ReconstructionRecipe | None = None
    observable: PauliString | None = field(default=None, compare=False)

    @property
    def plan_id(self) -> str:
        if self.kind == "mask":
            return f"mask:{mask_bits(self.mask, self.n)}"
        if self.kind == "pauli":
            return f"pauli:{self.observable}"
        return self.kind

    def projection_vectors(self) -> np.ndarray:
        """Column z is the state that outcome z projects onto (W^dagger |z>)."""
        return self.circuit.unitary().conj().T


def _frozen_outcomes(circuit: Circuit, n: int, mask: int) -> dict[int, tuple[int, int]]:
    """Identify which outcomes of ``circuit`` resolve swap pairs of ``mask``."""
    vecs = circuit.unitary().conj().T
    out = {}
    for z in range(4**n):
        v = vecs[:, z]
        nz = np.flatnonzero(np.abs(v) > 1e-9)
        if len(nz) != 2:
            continue
        x, y = int(nz[0]), int(nz[1])
        if swap_index(x, n) != y or (split(x, n)[0] ^ split(x, n)[1]) != mask:
            continue
        ratio = v[y] / v[x]
        if abs(abs(ratio) - 1) > 1e-9 or abs(ratio.imag) > 1e-9:
            raise AssertionError("projection is not a real swap eigenvector")
        out[z] = (x, 1 if ratio.real > 0 else -1)
    return out


@functools.lru_cache(maxsize=None)
def _pair_labels() -> tuple[str, ...]:
    """Label of each 2-bit outcome (control bit, target bit) of CNOT then H."""
    w = Circuit(2, (Gate("CNOT", (0, 1)), Gate("H", (0,)))).unitary()
    labels = []
    for z in range(4):
        v = w.conj().T[:, z]
        match = [k for k, b in _BELL.items() if abs(abs(np.vdot(b, v)) - 1) < 1e-9]
        assert len(match) == 1
        labels.append(match[0])
    return tuple(labels)


@functools.lru_cache(maxsize=None)
def b_gate_pair_diagonal() -> tuple[np.ndarray, np.ndarray]:
    """Outcome eigenvalues of SWAP and of (Z(x)I + I(x)Z)/2 * SWAP after one B gate."""
    u = build_b_gate(1).unitary()
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    z = np.diag([1.0, -1.0])
    zsym = (np.kron(z, np.eye(2)) + np.kron(np.eye(2), z)) / 2
    out = []
    for op in (swap, zsym @ swap):
        c = u @ op @ u.conj().T
        if np.max(np.abs(c - np.diag(np.diag(c)))) > 1e-10:
            raise AssertionError("B gate does not diagonalize the pair operator")
        out.append(np.real_if_close(np.diag(c)).real)
    return out[0], out[1]


def build_b_gate(n: int) -> Circuit:
    """B gate on every pair (i, i+n); two CNOTs per pair."""
    if n < 1:
        raise DomainError("n must be at least 1")
    gates = []
    q = math.pi
    for i in range(n):
        a, b = i, i + n
        gates += [
            Gate("Rx", (a,), (-q / 2,)), Gate("Rx", (b,), (q / 2,)),
            Gate("H", (a,)),
            Gate("CNOT", (a, b)),
            Gate("Rx", (a,), (q / 4,)), Gate("Rz", (b,), (q / 4,)),
            Gate("CNOT", (a, b)),
            Gate("H", (a,)), Gate("Rx", (b,), (-q / 2,)),
            Gate("Rx", (a,), (q / 2,)),
        ]
    return Circuit(2 * n, gates, label="b-gate")


def _s2_circuit(n: int) -> list[Gate]:
    return [Gate("CNOT", (i, i + n)) for i in range(n)] + [Gate("H", (i,)) for i in range(n)]


def _pairwise_outcome_labels(n: int) -> dict[int, tuple[str, ...]]:
    table = _pair_labels()
    out = {}
    for z in range(4**n):
        a, c = split(z, n)
        out[z] = tuple(table[(((a >> (n - 1 - i)) & 1) << 1) | ((c >> (n - 1 - i)) & 1)] for i in range(n))
    return out


@functools.lru_cache(maxsize=None)
def build_s2_projection(n: int) -> ProjectionPlan:
    """CNOT(i -> i+n) on every pair, then H on the first copy."""
    if n < 1:
        raise DomainError("n must be at least 1")
    circuit = Circuit(2 * n, _s2_circuit(n), label="s2-projection")
    return ProjectionPlan("s2", n, circuit, MappingProxyType(_pairwise_outcome_labels(n)))


def _sign(labels: tuple[str, ...]) -> int:
    return -1 if sum(lab == "A-" for lab in labels) % 2 else 1


def _a_pattern(labels: tuple[str, ...]) -> int:
    """Bit mask of the pairs whose label is A-type."""
    n = len(labels)
    return sum(1 << (n - 1 - i) for i, lab in enumerate(labels) if lab.startswith("A"))


@functools.lru_cache(maxsize=None)
def solve_s2_recipe(n: int) -> ReconstructionRecipe:
    """Purity from the computational basis plus the pairwise projection.

    Invariant states are read from the computational distribution; every
    projection outcome with at least one A-type pair enters with sign -1 per
    A- pair.  All-S outcomes carry no weight.
    """
    plan = build_s2_projection(n)
    cls = classify_basis(n)
    signed = {z: _sign(lab) for z, lab in plan.outcome_map.items() if _a_pattern(lab)}
    return ReconstructionRecipe("S2", n, {int(x): 1.0 for x in cls.invariant_states}, signed)


def s2_full_sum_recipe(n: int) -> ReconstructionRecipe:
    """Alternative purity recipe using only the projection: sum_z (-1)^{#A-} P(z)."""
    plan = build_s2_projection(n)
    return ReconstructionRecipe("S2-full", n, {}, {z: _sign(lab) for z, lab in plan.outcome_map.items()})


@functools.lru_cache(maxsize=None)
def build_mask_projection(n: int, mask: int | str) -> ProjectionPlan:
    """CNOT chain over the mask support of both copies, then H on its first qubit."""
    mask = parse_mask(mask, n)
    first = [i for i in range(n) if (mask >> (n - 1 - i)) & 1]
    support = sorted(first + [i + n for i in first])
    gates = [Gate("CNOT", (support[j - 1], support[j])) for j in range(len(support) - 1, 0, -1)]
    gates.append(Gate("H", (support[0],)))
    circuit = Circuit(2 * n, gates, label=f"mask {mask_bits(mask, n)}")
    outcomes = _frozen_outcomes(circuit, n, mask)
    expected = 2 * len(classify_basis(n).classes[mask])
    if len(outcomes) != expected:
        raise AssertionError(f"mask plan resolves {len(outcomes)} of {expected} pair states")
    return ProjectionPlan("mask", n, circuit, MappingProxyType(outcomes), mask=mask)


def term_masks(p: PauliString) -> frozenset[int]:
    """Masks whose pair states have a nonzero symmetrized eigenvalue for ``p``.

    ``p`` is rotated to its diagonal form first.
    """
    n = p.n_qubits
    if n > MAX_MASK_QUBITS:
        raise CapacityError(f"mask enumeration is limited to {MAX_MASK_QUBITS} qubits")
    o = p.diagonalized().diagonal()
    cls = classify_basis(n)
    found = set()
    for m, pairs in cls.classes.items():
        for x, _ in pairs:
            a, c = split(x, n)
            if o[a] + o[c] != 0:
                found.add(m)
                break
    return frozenset(found)


def required_masks(h: PauliSum) -> list[int]:
    """Union of :func:`term_masks` over all terms, ascending."""
    if h.n_qubits > MAX_MASK_QUBITS:
        raise CapacityError(f"mask enumeration is limited to {MAX_MASK_QUBITS} qubits")
    out: set[int] = set()
    for _, s in h.terms:
        out |= term_masks(s)
    return sorted(out)


# --------------------------------------------------------------------------
# Pauli numerators by phase imprinting


def _anf_monomials(truth: np.ndarray, width: int) -> list[int]:
    """Monomials (as bit sets) of the algebraic normal form of a Boolean table."""
    coef = truth.astype(np.uint8).copy()
    for b in range(width):
        step = 1 << b
        for x in range(len(coef)):
            if x & step:
                coef[x] ^= coef[x ^ step]
    return [int(m) for m in np.flatnonzero(coef)]


def phase_gates(flags: np.ndarray, width: int) -> list[Gate]:
    """MultiControlZ network imprinting -1 on the basis states where ``flags`` is set.

    A global -1 (the empty monomial) is dropped.
    """
    gates = []
    for m in _anf_monomials(flags, width):
        qubits = tuple(q for q in range(width) if (m >> (width - 1 - q)) & 1)
        if qubits:
            gates.append(Gate("MultiControlZ", qubits))
    return gates


def build_pauli_expectation_plan(p: PauliString | str, n: int | None = None) -> ProjectionPlan:
    """Plan whose recipe gives Tr(O S2 rho(x)rho) = Tr(O rho^2) for a diagonal O.

    Before the pairwise projection a -1 phase is imprinted on the states
    ``(a, c)`` with ``O a = -a`` and ``a < c``, so each swap pair picks up the
    eigenvalue O shares on both copies.  Orbits in which the two copies
    disagree on O carry no weight; invariant states are weighted by O from the
    computational distribution.
    """
    p = PauliString(p) if isinstance(p, str) else p
    n = p.n_qubits if n is None else n
    if p.n_qubits != n:
        raise InputError(f"{p} does not act on {n} qubits")
    if not p.is_diagonal:
        raise DomainError(f"{p} is not diagonal; rotate it first")
    o = p.diagonal()
    z = p.z_mask()
    idx = np.arange(4**n)
    a, c = idx >> n, idx & ((1 << n) - 1)
    flags = (o[a] == -1) & (a < c)
    base = build_s2_projection(n)
    circuit = Circuit(2 * n, phase_gates(flags, 2 * n) + _s2_circuit(n), label=f"pauli {p}")
    cls = classify_basis(n)
    signed = {}
    for out, labels in base.outcome_map.items():
        pattern = _a_pattern(labels)
        if pattern and bin(pattern & z).count("1") % 2 == 0:
            signed[out] = _sign(labels)
    comp = {int(x): float(o[x >> n]) for x in cls.invariant_states}
    recipe = ReconstructionRecipe(f"O S2 [{p}]", n, comp, signed)
    return ProjectionPlan("pauli", n, circuit, base.outcome_map, recipe=recipe, observable=p)


def recipe_operator(recipe: ReconstructionRecipe, plan: ProjectionPlan) -> np.ndarray:
    """Dense operator whose expectation the recipe evaluates (for oracle checks)."""
    d = 4**recipe.n
    vecs = plan.projection_vectors()
    op = np.zeros((d, d), dtype=complex)
    for x, w in recipe.computational_part.items():
        op[x, x] += w
    for z, s in recipe.signed_part.items():
        op += s * np.outer(vecs[:, z], vecs[:, z].conj())
    return op


@dataclass(frozen=True)
class CompiledPlans:
    """Everything that has to be measured for one Hamiltonian."""

    n: int
    masks: tuple[int, ...]
    mask_plans: Mapping[int, ProjectionPlan]
    s2_plan: ProjectionPlan
    s2_recipe: ReconstructionRecipe
    b_gate: Circuit

    def plan_ids(self) -> list[str]:
        return [self.mask_plans[m].plan_id for m in self.masks] + [self.s2_plan.plan_id]


def compile_plans(h: PauliSum) -> CompiledPlans:
    n = h.n_qubits
    masks = tuple(required_masks(h))
    return CompiledPlans(
        n=n,
        masks=masks,
        mask_plans=MappingProxyType({m: build_mask_projection(n, m) for m in masks}),
        s2_plan=build_s2_projection(n),
        s2_recipe=solve_s2_recipe(n),
        b_gate=build_b_gate(n),
    )
