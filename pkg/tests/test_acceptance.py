"""Acceptance gate: one block per criterion, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` for a per-criterion PASS/FAIL summary.
"""

import csv
import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import dense_sum
from qeomsim.ansatz import AnsatzSpec, reduced_lih_circuit, uccsd_circuit
from qeomsim.cli import main as cli_main
from qeomsim.fermion import FermionSum, basis_from_reference, jordan_wigner
from qeomsim.hamlib import SectorSpec, embedded, sector_spectrum
from qeomsim.mitigation import (
    DEFAULT_STRETCH,
    StretchSeries,
    bootstrap_mitigated_gaps,
    extrapolate,
    mitigate_eom,
    record_matrices,
)
from qeomsim.pauli import PauliSum, commutator, double_commutator, random_pauli_sum
from qeomsim.qeom import build_matrices, solve_secular
from qeomsim.qse import perturbation_study, qse_solve
from qeomsim.simulator import NoiseModel, QuantumState, expectation, run
from qeomsim.vqe import VqeConfig, minimize

criterion = pytest.mark.criterion


def _csv_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def h2():
    h = embedded("h2_0.75").hamiltonian
    vals, vecs = sector_spectrum(h, SectorSpec(2, 0.0))
    return h, vals, vecs


@pytest.fixture(scope="module")
def lih():
    h = embedded("lih_reduced_1.6").hamiltonian
    vals, vecs = sector_spectrum(h, SectorSpec(2, None))
    return h, vals, vecs


@pytest.fixture(scope="module")
def lih_noisy(lih):
    """Reduced-circuit VQE optimum and exact noisy states at each stretch factor."""
    h = lih[0]
    circ = reduced_lih_circuit()
    res = minimize(h, circ, [0.0])
    basis = basis_from_reference("0101", spin_conserving=False)
    ideal = run(circ, QuantumState.zero(4), values=res.params)
    ideal_gaps = solve_secular(build_matrices(ideal, h, basis)).energies
    states = [
        run(circ, QuantumState.zero(4, "density"), NoiseModel.from_device(c), values=res.params)
        for c in DEFAULT_STRETCH
    ]
    energies = [expectation(s, h) for s in states]
    systems = [build_matrices(s, h, basis) for s in states]
    return dict(h=h, basis=basis, res=res, ideal_gaps=ideal_gaps, states=states, energies=energies, systems=systems)


# 1 --------------------------------------------------------------------------------------------


@criterion(1, "Pauli commutators match dense oracle on 500 random triples")
def test_pauli_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for _ in range(500):
        n = int(rng.integers(1, 5))
        a, h, b = (random_pauli_sum(n, int(rng.integers(1, 6)), rng) for _ in range(3))
        A, H, B = (dense_sum(x.terms, n) for x in (a, h, b))
        AB = A @ B - B @ A
        AH = A @ H - H @ A
        HB = H @ B - B @ H
        dc = 0.5 * ((AH @ B - B @ AH) + (A @ HB - HB @ A))
        np.testing.assert_allclose(commutator(a, b).to_dense(), AB, atol=1e-10, rtol=0)
        np.testing.assert_allclose(double_commutator(a, h, b).to_dense(), dc, atol=1e-10, rtol=0)
    assert time.perf_counter() - start < 30


# 2 --------------------------------------------------------------------------------------------


@criterion(2, "Jordan-Wigner images obey canonical anticommutation relations")
@pytest.mark.parametrize("n_modes", [1, 2, 3, 4])
def test_jw_anticommutation(n_modes):
    a = [jordan_wigner(FermionSum.annihilate(j), n_modes).to_dense() for j in range(n_modes)]
    eye = np.eye(2**n_modes)
    for i, j in itertools.product(range(n_modes), repeat=2):
        ad = a[j].conj().T
        np.testing.assert_allclose(a[i] @ ad + ad @ a[i], eye * (i == j), atol=1e-12, rtol=0)
        np.testing.assert_allclose(a[i] @ a[j] + a[j] @ a[i], 0 * eye, atol=1e-12, rtol=0)


# 3 --------------------------------------------------------------------------------------------


@criterion(3, "H2 end-to-end: UCCSD ground energy and qEOM gaps")
def test_h2_end_to_end(h2):
    h, vals, _ = h2
    start = time.perf_counter()
    basis = basis_from_reference("0101")
    circ = uccsd_circuit(AnsatzSpec.from_basis(basis, "0101"))
    res = minimize(h, circ, np.zeros(len(basis)))
    assert abs(res.energy - np.linalg.eigvalsh(h.to_dense())[0]) < 1e-6
    state = run(circ, QuantumState.zero(4), values=res.params)
    gaps = solve_secular(build_matrices(state, h, basis)).energies
    np.testing.assert_allclose(gaps, vals[1:] - vals[0], atol=1e-6, rtol=0)
    assert time.perf_counter() - start < 60


# 4 --------------------------------------------------------------------------------------------


@criterion(4, "LiH reduced circuit: correlation energy and qEOM gaps")
def test_lih_reduced_correlation_energy(lih_noisy):
    assert abs(lih_noisy["res"].corr - (-0.014430)) <= 2e-3


@criterion(4, "LiH reduced circuit: correlation energy and qEOM gaps")
def test_lih_reduced_gaps(lih, lih_noisy):
    _, vals, _ = lih
    exact = vals[1:6] - vals[0]
    gaps = lih_noisy["ideal_gaps"]
    print("reduced-circuit gap errors (Ha):", np.abs(gaps - exact))
    assert np.all(np.abs(gaps - exact) <= 1e-2)


# 5 --------------------------------------------------------------------------------------------


@criterion(5, "qEOM on the exact ground state reproduces exact gaps")
@pytest.mark.parametrize("name", ["h2_0.75", "lih_reduced_1.6"])
@pytest.mark.parametrize("spin_conserving", [True, False])
def test_exactness(name, spin_conserving):
    h = embedded(name).hamiltonian
    vals, vecs = sector_spectrum(h, SectorSpec(2, 0.0 if spin_conserving else None))
    basis = basis_from_reference("0101", spin_conserving=spin_conserving)
    gaps = solve_secular(build_matrices(QuantumState(vecs[:, 0]), h, basis)).energies
    np.testing.assert_allclose(gaps, vals[1 : len(basis) + 1] - vals[0], atol=1e-8, rtol=0)


# 6 --------------------------------------------------------------------------------------------


@criterion(6, "Size intensivity under H -> H + c I")
def test_size_intensivity(h2):
    h, _, vecs = h2
    basis = basis_from_reference("0101")
    rng = np.random.default_rng(6)
    # a generic two-electron state so nothing hinges on exact eigenstates
    psi = vecs[:, 0] + 0.05 * vecs[:, 1] + 0.02j * vecs[:, 2]
    state = QuantumState(psi / np.linalg.norm(psi))
    gaps = solve_secular(build_matrices(state, h, basis)).energies
    qse = qse_solve(state, h, basis).energies
    for c in rng.uniform(-10, 10, size=5):
        shifted = h + PauliSum.identity(4, c)
        np.testing.assert_allclose(solve_secular(build_matrices(state, shifted, basis)).energies, gaps, atol=1e-9, rtol=0)
        np.testing.assert_allclose(qse_solve(state, shifted, basis).energies, qse + c, atol=1e-9, rtol=0)


# 7 --------------------------------------------------------------------------------------------


@criterion(7, "Shot-noise scaling of qEOM gap errors")
def test_shot_noise_study(tmp_path):
    start = time.perf_counter()
    assert cli_main(["shot-noise", "--seed", "7", "--repeats", "100", "--out", str(tmp_path)]) == 0
    rows = _csv_rows(tmp_path / "shot_noise.csv")
    gap = {int(r["shots"]): float(r["mean_abs_error"]) for r in rows if r["quantity"] == "gap_mean"}
    w_norm = [float(r["mean_abs_error"]) for r in rows if r["quantity"] == "norm_error_W"]
    ordered = [gap[s] for s in (1024, 2048, 4096, 8192)]
    print("mean gap error by shots:", gap)
    assert all(x > y for x, y in zip(ordered, ordered[1:]))
    assert 2 <= gap[1024] / gap[8192] <= 4.5
    assert max(w_norm) < 1e-10
    assert time.perf_counter() - start < 300


# 8 --------------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def error_propagation(tmp_path_factory):
    out = tmp_path_factory.mktemp("errprop")
    assert cli_main(["error-propagation", "--eps", "1e-4,1e-3,1e-2", "--out", str(out)]) == 0
    return _csv_rows(out / "error_propagation.csv")


@criterion(8, "Parameter-error propagation into energies")
def test_error_propagation_monotone(error_propagation):
    by_state = {}
    for r in error_propagation:
        by_state.setdefault(int(r["state"]), []).append((float(r["eps_radians"]), float(r["abs_energy_error_hartree"])))
    for pts in by_state.values():
        errs = [e for _, e in sorted(pts)]
        assert all(x < y for x, y in zip(errs, errs[1:]))


@criterion(8, "Parameter-error propagation into energies")
def test_error_propagation_gap_ratio(error_propagation):
    ratios = [float(r["gap_to_ground_error_ratio_dimensionless"]) for r in error_propagation
              if float(r["eps_radians"]) == 1e-2 and int(r["state"]) > 0]
    print("gap/ground error ratios at eps=1e-2:", ratios)
    assert all(r < 1 for r in ratios)


# 9 --------------------------------------------------------------------------------------------


@criterion(9, "Zero-noise extrapolation of LiH ground and excited energies")
def test_mitigation_efficacy(lih_noisy):
    start = time.perf_counter()
    d = lih_noisy
    e_ideal = d["res"].energy
    e_mit = extrapolate(StretchSeries(DEFAULT_STRETCH, tuple(d["energies"])))
    err_c1 = abs(d["energies"][0] - e_ideal)
    err_mit = abs(e_mit - e_ideal)
    print(f"ground error c=1 {err_c1:.3e}, extrapolated {err_mit:.3e}")
    assert err_c1 >= 5 * err_mit
    _, sol = mitigate_eom(d["systems"], DEFAULT_STRETCH)
    raw = solve_secular(d["systems"][0]).energies
    better = np.abs(sol.energies - d["ideal_gaps"]) < np.abs(raw - d["ideal_gaps"])
    print("mitigated gap beats c=1:", better)
    assert better.sum() >= 4
    assert time.perf_counter() - start < 600


@criterion(9, "Zero-noise extrapolation of LiH ground and excited energies")
def test_bootstrap_bands_deterministic(lih_noisy):
    d = lih_noisy
    readout = NoiseModel(readout=0.05)

    def bands(seed):
        records = [record_matrices(s, d["h"], d["basis"], 8192, seed + k, readout) for k, s in enumerate(d["states"])]
        return bootstrap_mitigated_gaps(records, DEFAULT_STRETCH, 5, resamples=50, seed=seed)

    (a, fa), (b, fb) = bands(11), bands(11)
    np.testing.assert_array_equal(a.median, b.median)
    np.testing.assert_array_equal(a.q1, b.q1)
    np.testing.assert_array_equal(a.q3, b.q3)
    assert fa == fb
    assert np.all(a.q1 <= a.median) and np.all(a.median <= a.q3)


# 10 -------------------------------------------------------------------------------------------


@criterion(10, "Unmitigated excited-state gaps are more robust than the ground energy")
def test_noisy_robustness_ordering(lih_noisy):
    d = lih_noisy
    raw = solve_secular(d["systems"][0]).energies
    median_gap_err = np.median(np.abs(raw - d["ideal_gaps"]))
    ground_err = abs(d["energies"][0] - d["res"].energy)
    print(f"median gap error {median_gap_err:.3e}, ground error {ground_err:.3e}")
    assert median_gap_err < ground_err


# 11 -------------------------------------------------------------------------------------------


@criterion(11, "qEOM is more robust than QSE to random state perturbations")
def test_qeom_vs_qse(h2):
    h, vals, vecs = h2
    basis = basis_from_reference("0101")
    rows, _ = perturbation_study(h, QuantumState(vecs[:, 0]), basis, vals, [0.0, 0.5], 1000, seed=11)
    table = {(r.alpha, r.method): r for r in rows}
    assert table[(0.0, "qeom_gaps")].mean_error < 1e-9
    assert table[(0.0, "qse_gaps")].mean_error < 1e-9
    assert table[(0.0, "qse_ground")].mean_error < 1e-9
    mid_qeom, mid_qse = table[(0.5, "qeom_gaps")], table[(0.5, "qse_gaps")]
    assert mid_qeom.n_ok >= 1000 and mid_qse.n_ok >= 1000
    print(f"alpha=0.5 mean gap error: qEOM {mid_qeom.mean_error:.3e}, QSE {mid_qse.mean_error:.3e}")
    assert mid_qeom.mean_error <= mid_qse.mean_error


# 12 -------------------------------------------------------------------------------------------

CLI_RUNS = {
    "vqe": ["vqe"],
    "vqe-sweep": ["vqe", "--ham", "lih_reduced_1.6", "--sweep", "--mode", "sampled", "--shots", "512", "--seed", "3"],
    "qeom": ["qeom", "--estimator", "sampled", "--shots", "512", "--seed", "3"],
    "qeom-mitigated": ["qeom", "--ham", "lih_reduced_1.6", "--mitigate"],
    "error-propagation": ["error-propagation"],
    "shot-noise": ["shot-noise", "--seed", "3", "--repeats", "3", "--shots", "512,256"],
    "qse-compare": ["qse-compare", "--seed", "3", "--trials", "10"],
    "mitigated-run": ["mitigated-run", "--seed", "3", "--shots", "8192", "--resamples", "3"],
    "compress": ["compress", "--seed", "3", "--starts", "2"],
}


@criterion(12, "CLI experiments are byte-identical across re-runs")
@pytest.mark.parametrize("name", sorted(CLI_RUNS))
def test_cli_determinism(name, tmp_path):
    outputs = []
    for run_idx in range(2):
        out = tmp_path / f"run{run_idx}"
        assert cli_main(CLI_RUNS[name] + ["--out", str(out)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0].keys() == outputs[1].keys() and outputs[0]
    for fname in outputs[0]:
        assert outputs[0][fname] == outputs[1][fname], fname


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-q"]))
