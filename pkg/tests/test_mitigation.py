import numpy as np
import pytest

from qeomsim.errors import DegenerateFitError, DimensionError
from qeomsim.fermion import basis_from_reference
from qeomsim.hamlib import SectorSpec, embedded, sector_spectrum
from qeomsim.mitigation import (
    StretchSeries,
    bootstrap,
    bootstrap_mitigated_gaps,
    extrapolate,
    mitigate_eom,
    record_matrices,
)
from qeomsim.qeom import EomSystem, build_matrices, solve_secular
from qeomsim.simulator import NoiseModel, QuantumState


def test_linear_extrapolation_is_exact_for_lines():
    series = StretchSeries((1, 1.25, 1.5), (3.0, 3.5, 4.0))
    assert extrapolate(series) == pytest.approx(1.0)


def test_elementwise_complex_extrapolation():
    a0 = np.array([[1 + 1j, 2], [3, 4j]])
    slope = np.array([[0.5, -1j], [2, 1]])
    series = StretchSeries((1, 2, 3), tuple(a0 + c * slope for c in (1, 2, 3)))
    np.testing.assert_allclose(extrapolate(series), a0)


def test_quadratic_order():
    vals = tuple(2 - c + 0.5 * c**2 for c in (1, 1.5, 2))
    assert extrapolate(StretchSeries((1, 1.5, 2), vals), order=2) == pytest.approx(2.0)


def test_series_validation():
    with pytest.raises(ValueError):
        StretchSeries((1,), (1.0,))
    with pytest.raises(ValueError):
        StretchSeries((0.5, 1), (1.0, 2.0))
    with pytest.raises(DimensionError):
        StretchSeries((1, 2), (np.zeros(2), np.zeros(3)))
    with pytest.raises(DegenerateFitError):
        extrapolate(StretchSeries((1, 1), (1.0, 2.0)))


def test_identical_systems_are_unchanged():
    h = embedded("h2_0.75").hamiltonian
    _, vecs = sector_spectrum(h, SectorSpec(2, 0.0))
    sys = build_matrices(QuantumState(vecs[:, 0]), h, basis_from_reference("0101"))
    mitigated, sol = mitigate_eom([sys, sys, sys], (1, 1.25, 1.5))
    np.testing.assert_allclose(mitigated.M, sys.M, atol=1e-12)
    np.testing.assert_allclose(sol.energies, solve_secular(sys).energies, atol=1e-10)


def test_mismatched_systems():
    a = EomSystem(*(np.eye(2, dtype=complex),) * 4, ["a", "b"])
    b = EomSystem(*(np.eye(3, dtype=complex),) * 4)
    with pytest.raises(DimensionError):
        mitigate_eom([a, b], (1, 2))


def test_bootstrap_band():
    samples = np.arange(100.0)
    band = bootstrap(samples, resamples=200, seed=0)
    assert band.q1 < band.median < band.q3
    assert band.median == pytest.approx(49.5, abs=3)
    again = bootstrap(samples, resamples=200, seed=0)
    assert band.median == again.median


def test_bootstrap_mitigated_gaps_deterministic():
    h = embedded("h2_0.75").hamiltonian
    _, vecs = sector_spectrum(h, SectorSpec(2, 0.0))
    state = QuantumState(vecs[:, 0])
    basis = basis_from_reference("0101")
    noise = NoiseModel(readout=0.02)
    records = [record_matrices(state, h, basis, 2048, seed=k, noise=noise) for k in range(2)]
    a = bootstrap_mitigated_gaps(records, (1, 1.5), 3, resamples=5, seed=1)
    b = bootstrap_mitigated_gaps(records, (1, 1.5), 3, resamples=5, seed=1)
    np.testing.assert_array_equal(a[0].median, b[0].median)
    assert a[1] == b[1]
