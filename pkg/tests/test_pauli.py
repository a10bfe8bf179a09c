import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdistill.exceptions import InputError
from vdistill.pauli import (
    PauliString,
    PauliSum,
    all_strings,
    basis_rotation_circuit,
    eigenvalue_of_outcome,
    exact_diagonalize,
    pauli_decompose,
    string_matrix,
)
from vdistill.simcore import make_rng, measurement_probabilities, random_density_matrix
from vdistill.vdcomp import SwapOperator


def test_string_matrices():
    assert np.allclose(string_matrix("I"), np.eye(2))
    assert np.allclose(string_matrix("Z"), np.diag([1, -1]))
    assert sorted(np.linalg.eigvalsh(string_matrix("XX")).round(12)) == [-1, -1, 1, 1]


def test_bad_letters_rejected():
    with pytest.raises(InputError):
        PauliString("XQ")


def test_rotation_examples():
    assert len(basis_rotation_circuit("ZZ").gates) == 0
    c = basis_rotation_circuit("X")
    assert [g.kind for g in c.gates] == ["H"]
    u = c.unitary()
    assert np.allclose(u @ string_matrix("X") @ u.conj().T, string_matrix("Z"))
    u = basis_rotation_circuit("Y").unitary()
    assert np.max(np.abs(u @ string_matrix("Y") @ u.conj().T - string_matrix("Z"))) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_rotation_diagonalizes_every_string(n):
    for p in all_strings(n):
        u = basis_rotation_circuit(p).unitary()
        r = u @ string_matrix(p) @ u.conj().T
        assert np.allclose(r, np.diag(np.diag(r)), atol=1e-12)
        assert np.allclose(np.abs(np.diag(r)), 1)


def test_eigenvalue_of_outcome():
    assert eigenvalue_of_outcome("ZI", "10") == -1
    assert eigenvalue_of_outcome("ZZ", "11") == 1
    assert eigenvalue_of_outcome("IZ", "10") == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_orthogonality(n):
    strings = list(all_strings(n))
    mats = [string_matrix(p) for p in strings]
    for i, j in itertools.product(range(len(mats)), repeat=2):
        assert np.trace(mats[i] @ mats[j]) == pytest.approx(2**n if i == j else 0, abs=1e-12)


def test_decompose_examples():
    ident = pauli_decompose(np.eye(4))
    assert ident.to_dict() == {} and ident.constant == pytest.approx(1.0)
    assert pauli_decompose(string_matrix("ZZ")).to_dict() == {"ZZ": 1.0}
    # Swap of two 2-qubit registers: product of (II + XX + YY + ZZ)/2 over the pairs.
    swap = pauli_decompose(SwapOperator(2).matrix())
    weights = list(swap.to_dict().values()) + [swap.constant]
    assert len(weights) == 16
    assert all(v == pytest.approx(0.25) for v in weights)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_decompose_round_trip(k, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k))
    herm = (a + a.conj().T) / 2
    assert np.max(np.abs(pauli_decompose(herm).matrix() - herm)) < 1e-10


def test_diagonal_expectation_from_probabilities():
    rng = make_rng(4)
    for _ in range(20):
        rho = random_density_matrix(3, rng)
        probs = measurement_probabilities(rho)
        for p in ("ZIZ", "IZI", "ZZZ"):
            est = sum(probs[x] * eigenvalue_of_outcome(p, x) for x in range(8))
            assert est == pytest.approx(np.trace(string_matrix(p) @ rho.entries).real, abs=1e-10)


def test_exact_diagonalize_examples(fixtures):
    assert exact_diagonalize(PauliSum.from_dict({"Z": 1.0})).ground_energy == pytest.approx(-1)
    h = PauliSum.from_dict({"ZZ": 1.0, "XX": 0.5})
    dense = string_matrix("ZZ") + 0.5 * string_matrix("XX")
    assert exact_diagonalize(h).ground_energy == pytest.approx(np.linalg.eigvalsh(dense)[0], abs=1e-12)
    fx = fixtures["h2_2q_2.00"]
    assert abs(exact_diagonalize(fx.hamiltonian).ground_energy - fx.exact_energy) < 1e-9


def test_constant_and_groups():
    h = PauliSum.from_dict({"XX": 0.3, "ZI": 0.2, "YY": 0.1, "IZ": -0.4}, constant=1.5)
    assert h.expectation(random_density_matrix(2, make_rng(0))) == pytest.approx(
        np.trace(h.matrix() @ random_density_matrix(2, make_rng(0)).entries).real)
    keys = list(h.groups())
    assert keys[0] == "ZZ"
    assert set(keys) == {"ZZ", "XX", "YY"}
