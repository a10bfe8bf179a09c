"""Simulated measurement: run every compiled circuit and collect bundles."""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .estimate import MeasurementBundle, masks_for_terms
from .exceptions import InputError
from .pauli import PauliSum, basis_circuit
from .simcore import (
    NOISELESS,
    Circuit,
    DensityMatrix,
    NoiseSpec,
    StateVector,
    apply_circuit_noisy,
    counts_to_vector,
    measurement_probabilities,
    sample_counts,
)
from .vdcomp import CompiledPlans, compile_plans, duplicate


def _evolve(circuit: Circuit, noise: NoiseSpec, rho: DensityMatrix | None = None) -> DensityMatrix:
    rho = rho if rho is not None else StateVector.zeros(circuit.n_qubits).to_density()
    return apply_circuit_noisy(circuit, rho, noise)


def _plain(noise: NoiseSpec) -> NoiseSpec:
    # per-gate overrides index the ansatz, not the appended measurement circuits
    return NoiseSpec(noise.two_qubit_depolarization)


def _doubled_noise(noise: NoiseSpec, length: int) -> NoiseSpec:
    overrides = dict(noise.per_gate_overrides)
    overrides.update({p + length: v for p, v in noise.per_gate_overrides.items()})
    return NoiseSpec(noise.two_qubit_depolarization, overrides)


def simulate_bundles(base: Circuit, h: PauliSum, noise: NoiseSpec = NOISELESS,
                     shots: int | str = "exact", seed: int | None = 0,
                     plans: CompiledPlans | None = None, include_bgate: bool = False,
                     noisy_readout: bool = True) -> dict[str, MeasurementBundle]:
    """Measure ``base`` in every basis ``h`` needs, on one and two copies.

    Each basis gets the undoubled distribution (raw energy), the doubled
    computational distribution and one distribution per mask plan its terms
    require.  The all-Z-like first basis also carries the S2 plan (and the
    B-gate circuit when asked).  With ``noisy_readout`` the projection
    circuits' own two-qubit gates are depolarized as well.
    """
    if base.n_qubits != h.n_qubits:
        raise InputError(f"circuit has {base.n_qubits} qubits, Hamiltonian has {h.n_qubits}")
    n = h.n_qubits
    plans = plans or compile_plans(h)
    readout = _plain(noise) if noisy_readout else NOISELESS
    groups = h.groups() or {"Z" * n: []}

    bundles = {}
    for gi, (key, terms) in enumerate(groups.items()):
        rotated = base + basis_circuit(key)
        single = measurement_probabilities(_evolve(rotated, noise))
        doubled = duplicate(rotated).doubled
        rho2 = _evolve(doubled, _doubled_noise(noise, len(rotated.gates)))
        bundles[key] = _measure_pair_state(rho2, single, key, terms, plans, readout, gi == 0, include_bgate)
    if shots == "exact":
        return bundles
    return sample_bundles(bundles, shots, seed)


def _measure_pair_state(rho2: DensityMatrix, single: np.ndarray, key: str, terms, plans: CompiledPlans,
                        readout: NoiseSpec, with_s2: bool, include_bgate: bool) -> MeasurementBundle:
    per_plan = {}
    for m in masks_for_terms([s for _, s in terms]):
        plan = plans.mask_plans[m]
        per_plan[plan.plan_id] = measurement_probabilities(_evolve(plan.circuit, readout, rho2))
    if with_s2:
        per_plan[plans.s2_plan.plan_id] = measurement_probabilities(_evolve(plans.s2_plan.circuit, readout, rho2))
    if include_bgate and (with_s2 or any(s.weight == 1 for _, s in terms)):
        per_plan["bgate"] = measurement_probabilities(_evolve(plans.b_gate, readout, rho2))
    return MeasurementBundle(n=plans.n, computational=measurement_probabilities(rho2), per_plan=per_plan,
                             shots="exact", seed=None, base=single, basis=key)


def measure_state(rho: DensityMatrix, h: PauliSum, plans: CompiledPlans | None = None,
                  include_bgate: bool = False) -> dict[str, MeasurementBundle]:
    """Exact bundles for a given state (noiseless rotations and projections)."""
    if rho.n_qubits != h.n_qubits:
        raise InputError(f"state has {rho.n_qubits} qubits, Hamiltonian has {h.n_qubits}")
    plans = plans or compile_plans(h)
    groups = h.groups() or {"Z" * h.n_qubits: []}
    bundles = {}
    for gi, (key, terms) in enumerate(groups.items()):
        r = apply_circuit_noisy(basis_circuit(key), rho)
        bundles[key] = _measure_pair_state(r.tensor(r), measurement_probabilities(r), key, terms, plans,
                                           NOISELESS, gi == 0, include_bgate)
    return bundles


def sample_bundles(exact: Mapping[str, MeasurementBundle], shots: int,
                   seed: int | None = 0) -> dict[str, MeasurementBundle]:
    """Draw ``shots`` outcomes from every circuit of exact-mode bundles.

    Each circuit gets its own child stream of ``SeedSequence(seed)``, taken in
    bundle order then (base, computational, plans in insertion order), so the
    result depends only on the seed.
    """
    if shots == "exact":
        return dict(exact)
    for b in exact.values():
        if b.shots != "exact":
            raise InputError("sample_bundles needs exact-mode bundles")
    total = sum(len(b.per_plan) + 2 for b in exact.values())
    streams = iter(np.random.SeedSequence(seed).spawn(total))

    def draw(probs: np.ndarray) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(next(streams)))
        return counts_to_vector(sample_counts(probs, int(shots), rng), probs.size)

    out = {}
    for key, b in exact.items():
        if b.base is None:
            next(streams)
            base = None
        else:
            base = draw(b.base)
        comp = draw(b.computational)
        per_plan = {pid: draw(v) for pid, v in b.per_plan.items()}
        out[key] = MeasurementBundle(n=b.n, computational=comp, per_plan=per_plan, shots=int(shots),
                                     seed=seed, base=base, basis=key)
    return out


def first_basis(bundles: Mapping[str, MeasurementBundle]) -> str:
    return next(iter(bundles))
