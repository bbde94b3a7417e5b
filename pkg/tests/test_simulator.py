import numpy as np
import pytest

from oracles import I2, X, Z, dense_label, kron_all
from qeomsim.errors import ModeMismatchError, NonHermitianError, SingularCalibrationError, UnboundParameterError
from qeomsim.hamlib import embedded
from qeomsim.pauli import PauliSum
from qeomsim.simulator import (
    Circuit,
    NoiseModel,
    QuantumState,
    apply_readout_error,
    correct_readout,
    depolarize,
    expectation,
    group_tpb,
    group_basis,
    readout_calibration,
    run,
    sample_expectation,
)

H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
P0, P1 = np.diag([1, 0]), np.diag([0, 1])


def cnot_oracle(c, t, n):
    a = [I2] * n
    b = [I2] * n
    a[c] = P0
    b[c] = P1
    b[t] = X
    return kron_all(a) + kron_all(b)


def rot_oracle(pauli, theta):
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * pauli


def test_unitary_matches_kron_oracle():
    circ = Circuit(3).h(0).cnot(0, 2).rz(1, 0.3).rx(2, -0.7).x(1)
    ref = np.eye(8)
    for m in [
        kron_all([H1, I2, I2]),
        cnot_oracle(0, 2, 3),
        kron_all([I2, rot_oracle(Z, 0.3), I2]),
        kron_all([I2, I2, rot_oracle(X, -0.7)]),
        kron_all([I2, X, I2]),
    ]:
        ref = m @ ref
    np.testing.assert_allclose(circ.unitary(), ref, atol=1e-12)


def test_bell_state_statevector():
    state = run(Circuit(2).h(0).cnot(0, 1), QuantumState.zero(2))
    np.testing.assert_allclose(state.data, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)], atol=1e-14)


def test_density_agrees_with_statevector():
    rng = np.random.default_rng(0)
    circ = Circuit(3)
    for _ in range(12):
        q = int(rng.integers(3))
        circ.ry(q, rng.normal()).cnot(q, (q + 1) % 3)
    psi = run(circ, QuantumState.zero(3)).data
    rho = run(circ, QuantumState.zero(3, "density")).data
    np.testing.assert_allclose(rho, np.outer(psi, psi.conj()), atol=1e-13)


def test_parameter_binding():
    circ = Circuit(1).ry(0, "a").rz(0, "b", scale=2.0)
    assert circ.parameters == ["a", "b"]
    bound = circ.bind({"a": 0.4, "b": 0.1})
    ref = rot_oracle(Z, 0.2) @ rot_oracle(dense_label("Y"), 0.4)
    np.testing.assert_allclose(bound.unitary(), ref, atol=1e-14)
    with pytest.raises(UnboundParameterError):
        run(circ, QuantumState.zero(1))


def test_full_depolarization_gives_maximally_mixed():
    rho = QuantumState.zero(1, "density").data
    np.testing.assert_allclose(depolarize(rho, (0,), 1.0, 1), np.eye(2) / 2, atol=1e-15)


def test_depolarizing_preserves_trace_and_shrinks_bloch_vector():
    noise = NoiseModel(p1={0: 0.1})
    state = run(Circuit(1).h(0), QuantumState.zero(1, "density"), noise)
    assert np.trace(state.data).real == pytest.approx(1.0)
    assert 0 < expectation(state, PauliSum({"X": 1})) < 1


def test_noisy_run_requires_density():
    with pytest.raises(ModeMismatchError):
        run(Circuit(1).h(0), QuantumState.zero(1), NoiseModel(p1={0: 0.1}))


def test_noiseless_model_equals_ideal():
    circ = Circuit(2).h(0).cnot(0, 1)
    a = run(circ, QuantumState.zero(2, "density"), NoiseModel()).data
    b = run(circ, QuantumState.zero(2, "density")).data
    np.testing.assert_allclose(a, b)


def test_device_linear_scaling():
    m = NoiseModel.from_device(1.5)
    base = NoiseModel.from_device(1.0)
    assert m.rate((0, 1)) == pytest.approx(1.5 * base.rate((1, 0)))
    assert m.readout_errors(4).tolist() == [0.05] * 4


def test_expectation_requires_hermitian():
    with pytest.raises(NonHermitianError):
        expectation(QuantumState.zero(1), PauliSum({"X": 1j}))


def test_grouping_is_qubitwise_commuting():
    h = embedded("h2_0.75").hamiltonian
    groups = group_tpb(h)
    assert sorted(l for g in groups for l in g) == sorted(h.labels)
    for g in groups:
        basis = group_basis(g)
        assert all(c == "I" or b == c for l in g for b, c in zip(basis, l))


def test_sampled_energy_converges():
    h = embedded("h2_0.75").hamiltonian
    state = QuantumState.basis("0101", 4)
    exact = expectation(state, h)
    est, err = sample_expectation(state, h, 20000, seed=1)
    assert abs(est - exact) < 5 * err + 1e-12


def test_readout_error_round_trip():
    rng = np.random.default_rng(0)
    noise = NoiseModel(readout=0.05)
    true = np.array([6000.0, 1000.0, 1000.0, 2000.0])
    noisy = apply_readout_error(true, noise, rng)
    fixed = correct_readout(noisy, readout_calibration(2, noise))
    assert 0.5 * np.abs(fixed / fixed.sum() - true / true.sum()).sum() < 0.02


def test_readout_calibration_singular():
    with pytest.raises(SingularCalibrationError):
        readout_calibration(2, NoiseModel(readout=0.5))


def test_sampling_is_seeded():
    h = embedded("h2_0.75").hamiltonian
    state = QuantumState.basis("0101", 4)
    assert sample_expectation(state, h, 500, seed=3) == sample_expectation(state, h, 500, seed=3)
