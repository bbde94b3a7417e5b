import itertools

import numpy as np
import pytest

from oracles import annihilator, fock_state
from qeomsim.errors import SingularityError
from qeomsim.fermion import (
    ExcitationOp,
    FermionSum,
    MoIntegrals,
    basis_from_reference,
    excitation_basis,
    jordan_wigner,
    mp2_coefficient,
    mp2_select,
    number_operator,
)


def test_jw_ladder_matches_oracle():
    n = 4
    for j in range(n):
        np.testing.assert_allclose(jordan_wigner(FermionSum.annihilate(j), n).to_dense(), annihilator(j, n), atol=1e-14)
        np.testing.assert_allclose(
            jordan_wigner(FermionSum.create(j), n).to_dense(), annihilator(j, n).conj().T, atol=1e-14
        )


def test_number_operator_counts_ones():
    n = 4
    dense = jordan_wigner(number_operator(n), n).to_dense()
    for bits in ("0000", "0101", "1110"):
        psi = fock_state(bits)
        assert np.vdot(psi, dense @ psi).real == pytest.approx(bits.count("1"))


def test_excitation_moves_electron():
    e = ExcitationOp((1,), (0,))
    out = jordan_wigner(e.to_fermion(), 4).to_dense() @ fock_state("0101")
    assert abs(abs(np.vdot(fock_state("1001"), out)) - 1) < 1e-14


def test_normal_ordering_preserves_operator():
    rng = np.random.default_rng(0)
    n = 3
    for _ in range(20):
        ops = tuple((int(rng.integers(n)), bool(rng.integers(2))) for _ in range(4))
        f = FermionSum.product(*ops, coeff=rng.normal())
        np.testing.assert_allclose(
            jordan_wigner(f.normal_ordered(), n).to_dense(), jordan_wigner(f, n).to_dense(), atol=1e-12
        )


def test_anticommutator_algebra():
    n = 3
    a = [FermionSum.annihilate(j) for j in range(n)]
    ad = [FermionSum.create(j) for j in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        acomm = (a[i] * ad[j] + ad[j] * a[i]).normal_ordered()
        expect = FermionSum.identity() if i == j else FermionSum()
        assert acomm.allclose(expect)
        assert (a[i] * a[j] + a[j] * a[i]).normal_ordered().allclose(FermionSum())


def test_adjoint_reverses_product():
    f = FermionSum.product((2, True), (0, False), coeff=1j)
    g = f.adjoint()
    np.testing.assert_allclose(jordan_wigner(g, 3).to_dense(), jordan_wigner(f, 3).to_dense().conj().T, atol=1e-14)


def test_excitation_validation():
    with pytest.raises(ValueError):
        ExcitationOp((1,), (1,))
    with pytest.raises(ValueError):
        ExcitationOp((3, 1), (0, 2))
    with pytest.raises(ValueError):
        ExcitationOp((1,), (0, 2))


def test_basis_from_reference():
    labels = [e.label for e in basis_from_reference("0101")]
    assert labels == ["1->0", "3->2", "1,3->0,2"]
    flip = [e.label for e in basis_from_reference("0101", spin_conserving=False)]
    assert len(flip) == 5 and flip[-1] == "1,3->0,2"


def test_excitation_basis_counts():
    sc = excitation_basis(1, 1, 1, 1)
    assert sum(e.degree == 1 for e in sc) == 2 and sum(e.degree == 2 for e in sc) == 1
    assert all(e.conserves_spin() for e in sc)


def test_excitation_json_round_trip():
    e = ExcitationOp((1, 3), (0, 2), ("a", "b", "a", "b"))
    assert ExcitationOp.from_json(e.to_json()) == e


def _toy_integrals(energies):
    h2 = np.zeros((4, 4, 4, 4))
    h2[0, 1, 2, 3] = 0.2
    h2[0, 1, 3, 2] = 0.05
    h2[0, 1, 2, 2] = 0.7
    return MoIntegrals(h2, np.array(energies), 2)


def test_mp2_coefficient_and_selection():
    ints = _toy_integrals([-1.0, -0.5, 0.3, 0.4])
    assert mp2_coefficient(ints, 0, 1, 2, 3) == pytest.approx(0.15 / (-1.5 - 0.7))
    sel = mp2_select(ints)
    assert sel.occupied == (0, 1) and sel.virtual == (2, 3)


def test_mp2_singular_denominator():
    ints = _toy_integrals([0.0, 0.0, 0.0, 0.0])
    with pytest.raises(SingularityError):
        mp2_coefficient(ints, 0, 1, 2, 3)
