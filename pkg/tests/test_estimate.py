import numpy as np
import pytest

from vdistill.estimate import (
    MeasurementBundle,
    b_gate_estimate,
    corrected_energy,
    corrected_pauli_expectation,
    eigenbasis,
    estimate_s2,
    reconstruct_statistics,
    symmetrized_eigenvalues,
)
from vdistill.exceptions import CoverageError, DegeneratePurityError, InputError
from vdistill.experiments import default_ansatz, evaluate_point
from vdistill.measure import measure_state, sample_bundles, simulate_bundles
from vdistill.pauli import PauliString, PauliSum, string_matrix
from vdistill.simcore import (
    Circuit,
    DensityMatrix,
    Gate,
    NoiseSpec,
    StateVector,
    apply_circuit_noisy,
    make_rng,
    purity,
    random_density_matrix,
    random_state,
)
from vdistill.vdcomp import compile_plans
from vdistill.vqe import AnsatzSpec, build_ansatz, raw_energy

ZZ = PauliSum.from_dict({"ZZ": 1.0})


def _first(bundles):
    return next(iter(bundles.values()))


def test_purity_examples():
    plans = compile_plans(ZZ)
    pure = StateVector.basis("01").to_density()
    assert estimate_s2(_first(measure_state(pure, ZZ, plans)), plans.s2_recipe) == pytest.approx(1.0)
    mixed = DensityMatrix.maximally_mixed(2)
    assert estimate_s2(_first(measure_state(mixed, ZZ, plans)), plans.s2_recipe) == pytest.approx(0.25)


def test_purity_of_noisy_ansatz():
    h = PauliSum.from_dict({"ZI": 0.3, "IZ": -0.2, "XX": 0.1})
    plans = compile_plans(h)
    circuit = build_ansatz(AnsatzSpec("reduced-ucc-2q", 2), [0.4])
    noise = NoiseSpec(0.05)
    bundles = simulate_bundles(circuit, h, noise, plans=plans, noisy_readout=False)
    rho = apply_circuit_noisy(circuit, StateVector.zeros(2).to_density(), noise)
    assert estimate_s2(_first(bundles), plans.s2_recipe) == pytest.approx(purity(rho), abs=1e-10)


def test_reconstruction_of_pure_state_is_symmetric():
    bell = Circuit(2, (Gate("H", (0,)), Gate("CNOT", (0, 1))))
    h = PauliSum.from_dict({"ZI": 1.0, "IZ": 1.0, "ZZ": 1.0})
    plans = compile_plans(h)
    b = _first(simulate_bundles(bell, h, plans=plans))
    rec = reconstruct_statistics(b, plans=plans.mask_plans)
    idx = np.arange(16)
    partner = ((idx & 3) << 2) | (idx >> 2)
    upper = (partner != idx) & (idx > partner)
    assert np.allclose(rec.probs[upper], 0)


def test_reconstruction_of_basis_state():
    h = PauliSum.from_dict({"ZI": 1.0, "IZ": 1.0, "ZZ": 1.0})
    plans = compile_plans(h)
    rho = StateVector.basis("01").to_density()
    rec = reconstruct_statistics(_first(measure_state(rho, h, plans)), plans=plans.mask_plans)
    assert rec.probs[0b0101] == pytest.approx(1)
    assert np.nansum(rec.probs) == pytest.approx(1)


def test_reconstruction_matches_eigenprojections():
    h = PauliSum.from_dict({"ZI": 1.0, "IZ": 1.0, "ZZ": 1.0})
    plans = compile_plans(h)
    v = eigenbasis(2)
    rng = make_rng(5)
    for _ in range(20):
        rho = random_density_matrix(2, rng)
        rec = reconstruct_statistics(_first(measure_state(rho, h, plans)), plans=plans.mask_plans)
        rho2 = rho.tensor(rho).entries
        want = np.real(np.einsum("ij,ik,kj->j", v, rho2, v))
        assert np.max(np.abs(rec.probs - want)) < 1e-10


def test_pure_state_correction_equals_raw():
    rng = make_rng(6)
    h = PauliSum.from_dict({"ZI": 0.7, "IZ": -0.3, "ZZ": 0.4, "XX": 0.2, "YY": 0.2})
    for _ in range(5):
        rho = random_state(2, rng).to_density()
        est = corrected_energy(h, measure_state(rho, h), 1.0, compile_plans(h).mask_plans)
        assert est.value == pytest.approx(est.raw_value, abs=1e-10)
        assert est.raw_value == pytest.approx(h.expectation(rho), abs=1e-10)


def test_mixed_state_ratio():
    psi = random_state(2, make_rng(7)).to_density().entries
    rho = DensityMatrix(2, 0.8 * psi + 0.2 * np.eye(4) / 4)
    plans = compile_plans(ZZ)
    b = measure_state(rho, ZZ, plans)
    s2 = estimate_s2(_first(b), plans.s2_recipe)
    r2 = rho.entries @ rho.entries
    want = np.trace(string_matrix("ZZ") @ r2).real / np.trace(r2).real
    assert corrected_energy(ZZ, b, s2, plans.mask_plans).value == pytest.approx(want, abs=1e-10)


def test_null_space_contributes_nothing():
    # ZI disagrees between |10> and |00>, so the 1000/0010 pair sits in the null space.
    lam = symmetrized_eigenvalues(PauliString("ZI"), 2)
    assert lam[0b1000] == 0 and lam[0b0010] == 0
    assert lam[0b0001] != 0


def test_coverage_and_guard_errors():
    plans = compile_plans(ZZ)
    rho = DensityMatrix.maximally_mixed(2)
    rec = reconstruct_statistics(_first(measure_state(rho, ZZ, plans)), plans=plans.mask_plans)
    with pytest.raises(CoverageError):
        corrected_pauli_expectation("ZI", rec, 0.5)
    with pytest.raises(DegeneratePurityError):
        corrected_pauli_expectation("ZZ", rec, 1e-9)


def test_bundle_validation():
    with pytest.raises(InputError):
        MeasurementBundle(1, np.array([0.5, 0.5, 0.1, 0.0]))
    with pytest.raises(InputError):
        MeasurementBundle(1, np.array([1.0, 0.0]))
    with pytest.raises(InputError):
        MeasurementBundle(1, np.array([3, 1, 0, 0]), shots=0)
    b = MeasurementBundle(1, np.array([3, 1, 0, 0]), shots=4)
    assert np.allclose(b.distribution(), [0.75, 0.25, 0, 0])


def test_single_term_noiseless_identity():
    h = PauliSum.from_dict({"Z": 1.0})
    rho = random_state(1, make_rng(8)).to_density()
    est = corrected_energy(h, measure_state(rho, h), 1.0)
    assert est.value == pytest.approx(est.raw_value, abs=1e-10)


def test_h2_noise_free_limit(fixtures, depol_oracle):
    fx = fixtures["h2_2q_2.00"]
    circuit = build_ansatz(AnsatzSpec("reduced-ucc-2q", 2), depol_oracle["h2_2q_2.00"]["params"])
    pt = evaluate_point(fx.hamiltonian, circuit, NoiseSpec(0.0), plans=compile_plans(fx.hamiltonian), bgate=True)
    exact = raw_energy(fx.hamiltonian, circuit)
    assert pt.raw == pytest.approx(exact, abs=1e-9)
    assert pt.corrected == pytest.approx(exact, abs=1e-9)
    assert pt.s2 == pytest.approx(1.0, abs=1e-12)
    assert pt.bgate_s2 == pytest.approx(1.0, abs=1e-12)


def test_bgate_purity_examples():
    h = PauliSum.from_dict({"ZI": 1.0, "IZ": 1.0, "ZZ": 1.0})
    plans = compile_plans(h)
    pure = measure_state(random_state(2, make_rng(9)).to_density(), h, plans, include_bgate=True)
    assert b_gate_estimate(h, pure, plans=plans.mask_plans).denominator == pytest.approx(1.0)
    mixed = measure_state(DensityMatrix.maximally_mixed(2), h, plans, include_bgate=True)
    assert b_gate_estimate(h, mixed, plans=plans.mask_plans).denominator == pytest.approx(0.25)


def test_monotone_mitigation_with_zero(fixtures, depol_oracle):
    for name, fx in fixtures.items():
        if fx.n_qubits == 4:
            continue
        h = fx.hamiltonian
        plans = compile_plans(h)
        circuit = build_ansatz(default_ansatz(fx), depol_oracle[name]["params"])
        for lam in (0.0, 0.05, 0.1):
            pt = evaluate_point(h, circuit, NoiseSpec(lam), plans=plans)
            assert pt.corrected <= pt.raw + 1e-12


def test_shot_sampling_converges():
    h = PauliSum.from_dict({"ZI": 0.5, "IZ": 0.5, "ZZ": 0.2, "XX": 0.1})
    plans = compile_plans(h)
    circuit = build_ansatz(AnsatzSpec("reduced-ucc-2q", 2), [0.6])
    exact = simulate_bundles(circuit, h, NoiseSpec(0.05), plans=plans)
    ref = evaluate_point(h, circuit, NoiseSpec(0.05), plans=plans, exact_bundles=exact).corrected
    vals = [evaluate_point(h, circuit, NoiseSpec(0.05), plans=plans, shots=10**6, seed=s,
                           exact_bundles=exact).corrected for s in range(20)]
    assert abs(np.mean(vals) - ref) < 3 * np.std(vals, ddof=1)


def test_sampling_is_seeded():
    h = PauliSum.from_dict({"ZZ": 1.0, "XX": 0.5})
    circuit = build_ansatz(AnsatzSpec("reduced-ucc-2q", 2), [0.3])
    exact = simulate_bundles(circuit, h)
    a = sample_bundles(exact, 100, 11)
    b = sample_bundles(exact, 100, 11)
    for key in a:
        assert np.array_equal(a[key].computational, b[key].computational)
        assert a[key].computational.sum() == 100
