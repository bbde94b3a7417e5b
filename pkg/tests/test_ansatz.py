import numpy as np
import pytest
from scipy.linalg import expm

from oracles import annihilator, fock_state
from qeomsim.ansatz import (
    PUBLISHED_BLOCK,
    AnsatzSpec,
    CompressedBlock,
    compress_block,
    reduced_lih_circuit,
    uccsd_circuit,
)
from qeomsim.fermion import ExcitationOp, basis_from_reference
from qeomsim.simulator import QuantumState, run


def _generator(e: ExcitationOp, n: int) -> np.ndarray:
    """Dense E - E^dagger built directly from ladder matrices."""
    a = [annihilator(j, n) for j in range(n)]
    op = np.eye(2**n, dtype=complex)
    for m in e.virtual:
        op = op @ a[m].conj().T
    for i in e.occupied:
        op = op @ a[i]
    return op - op.conj().T


@pytest.mark.parametrize("exc", [ExcitationOp((1,), (0,)), ExcitationOp((3,), (2,)), ExcitationOp((1, 3), (0, 2))])
def test_single_excitation_circuit_is_exact_exponential(exc):
    theta = 0.37
    spec = AnsatzSpec(((exc, "t"),), "0101")
    state = run(uccsd_circuit(spec), QuantumState.zero(4), values=[theta]).data
    ref = expm(theta * _generator(exc, 4)) @ fock_state("0101")
    assert abs(np.vdot(ref, state)) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(state, ref, atol=1e-12)


def test_zero_parameters_give_reference():
    spec = AnsatzSpec.from_basis(basis_from_reference("0101"), "0101")
    state = run(uccsd_circuit(spec), QuantumState.zero(4), values=np.zeros(3)).data
    np.testing.assert_allclose(np.abs(state), fock_state("0101").real, atol=1e-14)


def test_uccsd_structure():
    spec = AnsatzSpec.from_basis(basis_from_reference("0101"), "0101")
    circ = uccsd_circuit(spec)
    assert circ.parameters == ["t0", "t1", "t2"]
    assert circ.count("CNOT") > 0


def test_spec_validation():
    e = ExcitationOp((1,), (0,))
    with pytest.raises(ValueError):
        AnsatzSpec(((e, "a"), (e, "a")), "0101")
    with pytest.raises(ValueError):
        AnsatzSpec(((ExcitationOp((5,), (0,)), "a"),), "0101")


def test_reduced_circuit_gate_counts():
    circ = reduced_lih_circuit()
    assert circ.count("CNOT") == 6
    assert circ.count("U3") == 8
    assert circ.parameters == ["theta"]


def test_reduced_circuit_zero_angle_is_reference():
    state = run(reduced_lih_circuit(0.0), QuantumState.zero(4)).data
    assert abs(np.vdot(fock_state("0101"), state)) == pytest.approx(1.0, abs=1e-12)


def test_reduced_circuit_stays_in_two_electron_space():
    state = run(reduced_lih_circuit(0.8), QuantumState.zero(4)).data
    weights = [abs(state[i]) ** 2 for i in range(16) if bin(i).count("1") != 2]
    assert sum(weights) < 1e-12


def test_block_json_round_trip(tmp_path):
    path = tmp_path / "block.json"
    PUBLISHED_BLOCK.save(path)
    assert CompressedBlock.load(path) == PUBLISHED_BLOCK


def test_compression_reaches_double_excitation():
    result = compress_block(seed=0, n_starts=4)
    assert result.worst_fidelity > 0.999
    exc = ExcitationOp((1, 3), (0, 2))
    t = 0.6
    target = expm(0.5 * t * _generator(exc, 4)) @ fock_state("0101")
    state = run(result.block.circuit(t), QuantumState.zero(4)).data
    assert abs(np.vdot(target, state)) ** 2 > 0.999
