import numpy as np
import pytest
from sklearn.base import clone

from vdistill.estimators import VirtualDistiller, VQESolver
from vdistill.exceptions import DimensionError, InputError
from vdistill.pauli import PauliSum
from vdistill.vqe import AnsatzSpec, build_ansatz


def test_distiller_params_and_clone():
    est = VirtualDistiller(depolarization=0.05, shots=1000, seed=3)
    assert est.get_params()["depolarization"] == 0.05
    twin = clone(est)
    assert twin.get_params() == est.get_params()


def test_distiller_transform(fixtures):
    fx = fixtures["h2_2q_2.00"]
    circuits = [build_ansatz(AnsatzSpec("reduced-ucc-2q", 2), [t]) for t in (-1.13, 0.2)]
    est = VirtualDistiller(depolarization=0.05).fit(fx.hamiltonian)
    out = est.transform(circuits)
    assert out.shape == (2, 3)
    assert out[0, 1] <= out[0, 0]
    assert np.all((out[:, 2] > 0) & (out[:, 2] < 1))
    assert np.allclose(est.predict(circuits), out[:, 1])
    bg = VirtualDistiller(depolarization=0.05, method="bgate-hybrid").fit(fx.hamiltonian)
    assert bg.transform(circuits[0])[0, 1] < out[0, 1]


def test_distiller_validation(fixtures):
    with pytest.raises(InputError):
        VirtualDistiller(method="magic").fit(fixtures["h2_2q_2.00"].hamiltonian)
    est = VirtualDistiller().fit({"ZZ": 1.0})
    with pytest.raises(DimensionError):
        est.transform([build_ansatz(AnsatzSpec("hardware-efficient", 3, 1), np.zeros(12))])
    with pytest.raises(InputError):
        est.transform(["not a circuit"])
    with pytest.raises(InputError):
        VirtualDistiller().fit([1, 2, 3])


def test_unfitted_raises():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        VirtualDistiller().transform([])
    with pytest.raises(NotFittedError):
        VQESolver().circuit()


def test_vqe_solver_two_qubit(fixtures):
    fx = fixtures["h2_2q_2.00"]
    solver = VQESolver().fit(fx.hamiltonian)
    assert solver.params_.shape == (1,)
    assert solver.energy_ == pytest.approx(fx.exact_energy, abs=1e-3)
    assert solver.predict(fx.hamiltonian)[0] == pytest.approx(solver.energy_)
    with pytest.raises(DimensionError):
        solver.predict(PauliSum.from_dict({"ZZZ": 1.0}))
    assert clone(solver).get_params()["grid_points"] == 51
