"""Quantum subspace expansion and the random-unitary robustness study against qEOM."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from qeomsim.errors import IllConditionedError
from qeomsim.fermion import ExcitationOp, jordan_wigner
from qeomsim.pauli import PauliSum
from qeomsim.qeom import Estimator, Exact, build_matrices, solve_secular
from qeomsim.simulator import QuantumState


@dataclass
class QseSystem:
    H: np.ndarray
    S: np.ndarray
    energies: np.ndarray
    retained_dim: int


@lru_cache(maxsize=32)
def _qse_operators(h_key: tuple, n_qubits: int, basis: tuple[ExcitationOp, ...]):
    h = PauliSum(dict(h_key), n_qubits)
    ops = [PauliSum.identity(n_qubits)] + [jordan_wigner(e.to_fermion(), n_qubits) for e in basis]
    k = len(ops)
    hmat = [[ops[u].adjoint() @ h @ ops[v] for v in range(k)] for u in range(k)]
    smat = [[ops[u].adjoint() @ ops[v] for v in range(k)] for u in range(k)]
    dense = None
    if n_qubits <= 8:
        dense = (np.array([[o.to_dense() for o in row] for row in hmat]),
                 np.array([[o.to_dense() for o in row] for row in smat]))
    return hmat, smat, dense


def qse_matrices(
    state: QuantumState, h: PauliSum, basis: Sequence[ExcitationOp], estimator: Estimator | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Subspace matrices over ``{I} ∪ {E_mu}``: ``H_uv = <O_u^† H O_v>``, ``S_uv = <O_u^† O_v>``."""
    estimator = estimator or Exact()
    hops, sops, dense = _qse_operators(tuple(sorted(h.terms.items())), h.n_qubits, tuple(basis))
    if isinstance(estimator, Exact) and dense is not None:
        if state.mode == "statevector":
            psi = state.data
            return (np.einsum("i,abij,j->ab", psi.conj(), dense[0], psi),
                    np.einsum("i,abij,j->ab", psi.conj(), dense[1], psi))
        return np.einsum("abij,ji->ab", dense[0], state.data), np.einsum("abij,ji->ab", dense[1], state.data)
    k = len(hops)
    hm = np.zeros((k, k), dtype=complex)
    sm = np.zeros((k, k), dtype=complex)
    for u in range(k):
        for v in range(k):
            hm[u, v] = estimator.estimate(state, hops[u][v], 2 * (u * k + v))
            sm[u, v] = estimator.estimate(state, sops[u][v], 2 * (u * k + v) + 1)
    return hm, sm


def qse_solve(
    state: QuantumState,
    h: PauliSum,
    basis: Sequence[ExcitationOp],
    metric_tol: float = 1e-7,
    estimator: Estimator | None = None,
) -> QseSystem:
    """Absolute energies (ascending) of ``H C = S C E`` on the regularized overlap space."""
    hm, sm = qse_matrices(state, h, basis, estimator)
    hm = 0.5 * (hm + hm.conj().T)
    sm = 0.5 * (sm + sm.conj().T)
    svals, svecs = np.linalg.eigh(sm)
    keep = svals > metric_tol
    if not np.any(keep):
        raise IllConditionedError(f"QSE overlap is numerically singular (largest eigenvalue {svals[-1]:.3e})")
    xform = svecs[:, keep] / np.sqrt(svals[keep])
    energies = np.linalg.eigvalsh(xform.conj().T @ hm @ xform)
    return QseSystem(hm, sm, energies, int(keep.sum()))


def random_unitary(dim: int, alpha: float, rng: np.random.Generator, sigma: float = 0.05) -> np.ndarray:
    """``exp(K)`` with ``K`` anti-Hermitian, zero diagonal, and each off-diagonal pair
    nonzero with probability ``alpha`` (complex Gaussian entry of scale ``sigma``)."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    iu = np.triu_indices(dim, 1)
    mask = rng.random(iu[0].size) < alpha
    z = sigma * (rng.normal(size=iu[0].size) + 1j * rng.normal(size=iu[0].size)) / np.sqrt(2)
    k = np.zeros((dim, dim), dtype=complex)
    k[iu] = np.where(mask, z, 0)
    k = k - k.conj().T
    return expm(k)


@dataclass(frozen=True)
class StudyRow:
    alpha: float
    method: str
    mean_error: float
    std_error: float
    n_ok: int
    n_failed: int


def perturbation_study(
    h: PauliSum,
    ground: QuantumState,
    basis: Sequence[ExcitationOp],
    exact_levels: Sequence[float],
    alphas: Sequence[float],
    trials: int,
    seed: int,
    sigma: float = 0.05,
    metric_tol: float = 1e-7,
) -> tuple[list[StudyRow], dict]:
    """Perturb ``ground`` by ``U(alpha)`` and compare QSE and qEOM against exact levels.

    ``exact_levels`` are the in-sector energies ``[E0, E1, ...]``.  Gap errors
    are averaged over the ``len(exact_levels) - 1`` lowest gaps.  Returns the
    summary rows and the raw per-trial errors keyed by ``(alpha, method)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    exact_levels = np.asarray(exact_levels, dtype=float)
    e0, gaps = exact_levels[0], exact_levels[1:] - exact_levels[0]
    n_gaps = gaps.size
    psi0 = ground.data
    dim = psi0.size
    methods = ("qse_ground", "qeom_gaps", "qse_gaps")
    raw: dict = {}
    rows = []
    for a_idx, alpha in enumerate(alphas):
        rng = np.random.default_rng(np.random.SeedSequence([seed, a_idx]))
        errs = {m: [] for m in methods}
        failed = {m: 0 for m in methods}
        for _ in range(trials):
            state = QuantumState(random_unitary(dim, alpha, rng, sigma) @ psi0, validate=False)
            try:
                q = qse_solve(state, h, basis, metric_tol).energies
                errs["qse_ground"].append(abs(q[0] - e0))
                if q.size > n_gaps:
                    errs["qse_gaps"].append(float(np.mean(np.abs((q[1:n_gaps + 1] - q[0]) - gaps))))
                else:
                    failed["qse_gaps"] += 1
            except IllConditionedError:
                failed["qse_ground"] += 1
                failed["qse_gaps"] += 1
            try:
                g = solve_secular(build_matrices(state, h, basis), metric_tol).energies
                if g.size >= n_gaps:
                    errs["qeom_gaps"].append(float(np.mean(np.abs(g[:n_gaps] - gaps))))
                else:
                    failed["qeom_gaps"] += 1
            except IllConditionedError:
                failed["qeom_gaps"] += 1
        for m in methods:
            vals = np.array(errs[m])
            raw[(float(alpha), m)] = vals
            rows.append(StudyRow(float(alpha), m, float(vals.mean()) if vals.size else float("nan"),
                                 float(vals.std()) if vals.size else float("nan"), int(vals.size), failed[m]))
    return rows, raw
