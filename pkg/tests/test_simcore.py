import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdistill.exceptions import DimensionError, DomainError
from vdistill.simcore import (
    Circuit,
    DensityMatrix,
    Gate,
    NoiseSpec,
    StateVector,
    apply_circuit_noisy,
    apply_circuit_pure,
    ket,
    make_rng,
    measurement_probabilities,
    purity,
    random_density_matrix,
    random_state,
    sample_counts,
)
from vdistill.vqe import AnsatzSpec, build_ansatz


def test_empty_circuit_is_identity():
    out = apply_circuit_pure(Circuit(2, ()), StateVector.zeros(2))
    assert np.allclose(out.amplitudes, ket("00"))


def test_hadamard_on_zero():
    out = apply_circuit_pure(Circuit(1, (Gate("H", (0,)),)), StateVector.zeros(1))
    assert np.allclose(out.amplitudes, np.array([1, 1]) / math.sqrt(2))


def test_reduced_ucc_at_zero_is_hartree_fock():
    circuit = build_ansatz(AnsatzSpec("reduced-ucc-2q", 2), [0.0])
    out = apply_circuit_pure(circuit, StateVector.zeros(2))
    assert np.allclose(np.abs(out.amplitudes), ket("01"))


def test_big_endian_labels():
    out = apply_circuit_pure(Circuit(2, (Gate("X", (0,)),)), StateVector.zeros(2))
    assert np.allclose(out.amplitudes, ket("10"))


def test_noiseless_matches_pure_evolution():
    rng = make_rng(1)
    spec = AnsatzSpec("hardware-efficient", 3, 2, "110")
    circuit = build_ansatz(spec, rng.uniform(-np.pi, np.pi, spec.n_params))
    psi = random_state(3, rng)
    pure = apply_circuit_pure(circuit, psi).to_density().entries
    mixed = apply_circuit_noisy(circuit, psi.to_density(), NoiseSpec(0.0)).entries
    assert np.max(np.abs(pure - mixed)) < 1e-10


def test_full_depolarization_of_cnot_is_maximally_mixed():
    psi = random_state(2, make_rng(2))
    out = apply_circuit_noisy(Circuit(2, (Gate("CNOT", (0, 1)),)), psi.to_density(), NoiseSpec(1.0))
    assert np.allclose(out.entries, np.eye(4) / 4)
    assert purity(out) == pytest.approx(0.25)


def test_per_gate_override():
    c = Circuit(2, (Gate("CNOT", (0, 1)), Gate("CNOT", (0, 1))))
    noise = NoiseSpec(0.5, {1: 0.0})
    assert noise.strength(0) == 0.5 and noise.strength(1) == 0.0
    with pytest.raises(DomainError):
        NoiseSpec(1.5)
    out = apply_circuit_noisy(c, StateVector.zeros(2).to_density(), noise)
    assert purity(out) < 1


def test_measurement_probabilities():
    assert np.allclose(measurement_probabilities(StateVector.basis("01")), [0, 1, 0, 0])
    bell = StateVector(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert np.allclose(measurement_probabilities(bell), [0.5, 0, 0, 0.5])
    assert np.allclose(measurement_probabilities(DensityMatrix.maximally_mixed(2)), 0.25)


def test_purity_examples():
    assert purity(StateVector.basis("10").to_density()) == pytest.approx(1.0)
    assert purity(DensityMatrix.maximally_mixed(2)) == pytest.approx(0.25)
    rho = DensityMatrix(2, np.diag([0.9, 0, 0, 0.1]))
    assert purity(rho) == pytest.approx(0.82)


def test_invalid_states_rejected():
    with pytest.raises(DomainError):
        StateVector(1, np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        DensityMatrix(1, np.diag([0.5, 0.6]))


def test_width_mismatch_rejected():
    with pytest.raises(DimensionError):
        apply_circuit_pure(Circuit(2, ()), StateVector.zeros(3))


def test_sample_counts_examples():
    assert sample_counts([1, 0], 100, 0) == {0: 100}
    sigma = math.sqrt(8196 * 0.25 * 0.75)
    for seed in range(5):
        counts = sample_counts(np.full(4, 0.25), 8196, seed)
        assert all(abs(counts.get(k, 0) - 2049) < 5 * sigma for k in range(4))
    bell = [0.5, 0, 0, 0.5]
    mean = np.mean([sample_counts(bell, 8196, s).get(0, 0) / 8196 for s in range(100)])
    assert abs(mean - 0.5) < 0.01


def test_sample_counts_converges():
    probs = np.array([0.1, 0.2, 0.3, 0.4])
    counts = sample_counts(probs, 10**6, 3)
    freq = np.array([counts.get(k, 0) for k in range(4)]) / 10**6
    assert np.max(np.abs(freq - probs)) < 0.005


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1), st.floats(0, 1))
def test_depolarization_keeps_valid_state(n, seed, lam):
    rng = make_rng(seed)
    rho = random_density_matrix(n, rng)
    gates = [Gate("CNOT", (q, q + 1)) for q in range(n - 1)] + [Gate("Ry", (0,), (rng.uniform(),))]
    out = apply_circuit_noisy(Circuit(n, gates), rho, NoiseSpec(lam))
    assert abs(np.trace(out.entries) - 1) < 1e-12
    assert np.min(np.linalg.eigvalsh(out.entries)) > -1e-12
    assert purity(out) <= purity(rho) + 1e-12 or n == 1
