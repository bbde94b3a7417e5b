"""qEOM matrices, the secular generalized eigenproblem, and excitation energies.

For excitation operators ``E_mu`` and ground state ``|0>``::

    M_mn = <[E_m^†, H, E_n]>      Q_mn = -<[E_m^†, H, E_n^†]>
    V_mn = <[E_m^†, E_n]>         W_mn = -<[E_m^†, E_n^†]>

with ``[A, B, C] = ([[A, B], C] + [A, [B, C]]) / 2``.  Excitation energies
solve ``[[M, Q], [Q*, M*]] c = E [[V, W], [-W*, -V*]] c``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from qeomsim.errors import EstimatorError, IllConditionedError
from qeomsim.fermion import ExcitationOp, jordan_wigner
from qeomsim.pauli import PauliSum, commutator, double_commutator
from qeomsim.simulator import NoiseModel, QuantumState, combine_groups, expectation_value, sample_groups

MATRIX_NAMES = ("M", "Q", "V", "W")
DENSE_FAST_PATH_QUBITS = 8


@dataclass(frozen=True)
class EomOperators:
    """Qubit operators whose expectations give M, Q, V, W (index ``[name][m][n]``)."""

    ops: dict
    size: int

    def dense(self) -> np.ndarray:
        """Stacked dense matrices, shape ``(4, k, k, 2^n, 2^n)``; cached."""
        cached = self.ops.get("_dense")
        if cached is None:
            cached = np.array(
                [[[op.to_dense() for op in row] for row in self.ops[name]] for name in MATRIX_NAMES]
            )
            self.ops["_dense"] = cached
        return cached

    def items(self):
        for name in MATRIX_NAMES:
            for m in range(self.size):
                for n in range(self.size):
                    yield name, m, n, self.ops[name][m][n]


@lru_cache(maxsize=64)
def _eom_operators(h_key: tuple, n_qubits: int, basis: tuple[ExcitationOp, ...]) -> EomOperators:
    h = PauliSum(dict(h_key), n_qubits)
    exc = [jordan_wigner(e.to_fermion(), n_qubits) for e in basis]
    dex = [jordan_wigner(e.adjoint(), n_qubits) for e in basis]
    k = len(basis)
    ops = {name: [[None] * k for _ in range(k)] for name in MATRIX_NAMES}
    for m in range(k):
        for n in range(k):
            ops["M"][m][n] = double_commutator(dex[m], h, exc[n])
            ops["Q"][m][n] = -double_commutator(dex[m], h, dex[n])
            ops["V"][m][n] = commutator(dex[m], exc[n])
            ops["W"][m][n] = -commutator(dex[m], dex[n])
    return EomOperators(ops, k)


def eom_operators(h: PauliSum, basis: Sequence[ExcitationOp]) -> EomOperators:
    """Commutator operators for ``(h, basis)``; computed once and cached."""
    return _eom_operators(tuple(sorted(h.terms.items())), h.n_qubits, tuple(basis))


class Estimator(Protocol):
    def estimate(self, state: QuantumState, op: PauliSum, index: int) -> complex: ...


@dataclass(frozen=True)
class Exact:
    """Exact expectation values (trace or inner product)."""

    def estimate(self, state: QuantumState, op: PauliSum, index: int) -> complex:
        return expectation_value(state, op)


@dataclass(frozen=True)
class Sampled:
    """Finite-shot estimates: every element measured independently with ``shots`` per TPB group.

    Element ``index`` draws from a stream spawned from ``seed``; ``noise``
    adds its readout error (corrected through the calibration matrix).
    """

    shots: int
    seed: int
    noise: NoiseModel | None = None

    def estimate(self, state: QuantumState, op: PauliSum, index: int) -> complex:
        if not op.terms:
            return 0j
        ss = np.random.SeedSequence([self.seed, index])
        samples = sample_groups(state, op.labels, self.shots, np.random.default_rng(ss), self.noise)
        return combine_groups(op, samples)[0]


def _complex_matrix_to_json(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _complex_matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex).reshape(len(rows), -1)


@dataclass
class EomSystem:
    M: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    W: np.ndarray
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        shapes = {np.shape(a) for a in (self.M, self.Q, self.V, self.W)}
        if len(shapes) != 1:
            raise ValueError(f"M, Q, V, W shapes differ: {shapes}")
        (shape,) = shapes
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"matrices must be square, got {shape}")

    @property
    def size(self) -> int:
        return self.M.shape[0]

    @property
    def lhs(self) -> np.ndarray:
        return np.block([[self.M, self.Q], [self.Q.conj(), self.M.conj()]])

    @property
    def rhs(self) -> np.ndarray:
        return np.block([[self.V, self.W], [-self.W.conj(), -self.V.conj()]])

    def matrices(self) -> dict[str, np.ndarray]:
        return {"M": self.M, "Q": self.Q, "V": self.V, "W": self.W}

    def permuted(self, order: Sequence[int]) -> "EomSystem":
        idx = np.asarray(order)
        labels = [self.labels[i] for i in idx] if self.labels else []
        return EomSystem(*(a[np.ix_(idx, idx)] for a in (self.M, self.Q, self.V, self.W)), labels)

    def to_json(self) -> dict:
        out = {name: _complex_matrix_to_json(a) for name, a in self.matrices().items()}
        out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EomSystem":
        if not data["M"]:
            z = np.zeros((0, 0), dtype=complex)
            return cls(z, z.copy(), z.copy(), z.copy(), list(data.get("labels", [])))
        return cls(*(_complex_matrix_from_json(data[n]) for n in MATRIX_NAMES), list(data.get("labels", [])))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EomSystem":
        return cls.from_json(json.loads(Path(path).read_text()))


def build_matrices(
    state: QuantumState,
    h: PauliSum,
    basis: Sequence[ExcitationOp],
    estimator: Estimator | None = None,
) -> EomSystem:
    """Evaluate M, Q, V, W on ``state``.

    Gate noise enters through ``state`` (a density matrix from a noisy run);
    the estimator decides exact versus finite-shot evaluation.
    """
    estimator = estimator or Exact()
    k = len(basis)
    ops = eom_operators(h, basis)
    if isinstance(estimator, Exact) and k and state.n_qubits <= DENSE_FAST_PATH_QUBITS:
        d = ops.dense()
        if state.mode == "statevector":
            vals = np.einsum("i,mabij,j->mab", state.data.conj(), d, state.data)
        else:
            vals = np.einsum("mabij,ji->mab", d, state.data)
        return EomSystem(*vals, [e.label for e in basis])
    mats = {name: np.zeros((k, k), dtype=complex) for name in MATRIX_NAMES}
    for flat, (name, m, n, op) in enumerate(ops.items()):
        try:
            mats[name][m, n] = estimator.estimate(state, op, flat)
        except Exception as exc:  # attach element coordinates
            raise EstimatorError(f"estimating {name}[{m},{n}] failed: {exc}") from exc
    return EomSystem(mats["M"], mats["Q"], mats["V"], mats["W"], [e.label for e in basis])


@dataclass
class EomSolution:
    """Positive excitation energies (ascending) with amplitudes and solver diagnostics."""

    energies: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    all_eigenvalues: np.ndarray
    retained_dim: int
    discarded_dim: int
    min_retained_metric: float
    metric_condition: float
    dropped_small: int = 0

    def __iter__(self):
        for k, e in enumerate(self.energies):
            yield float(e), self.X[:, k], self.Y[:, k]

    def __len__(self) -> int:
        return len(self.energies)

    def diagnostics(self) -> dict:
        return {
            "retained_dim": self.retained_dim,
            "discarded_dim": self.discarded_dim,
            "min_retained_metric_eigenvalue": self.min_retained_metric,
            "metric_condition": self.metric_condition,
            "dropped_near_zero": self.dropped_small,
        }


def solve_secular(sys: EomSystem, metric_tol: float = 1e-7) -> EomSolution:
    """Solve the secular pencil by canonical orthogonalization of the metric.

    The metric is diagonalized, eigenvectors with ``|b| <= metric_tol`` are
    discarded, and the remaining space is scaled to ``|b| = 1``.  The pencil
    then reduces to the standard problem ``diag(sign b) X^† A X``; its real
    positive eigenvalues are the excitation energies.
    """
    k = sys.size
    if k == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return EomSolution(np.zeros(0), empty, empty, np.zeros(0), 0, 0, float("nan"), float("nan"))
    a = sys.lhs
    b = sys.rhs
    a = 0.5 * (a + a.conj().T)
    b = 0.5 * (b + b.conj().T)
    bvals, bvecs = np.linalg.eigh(b)
    keep = np.abs(bvals) > metric_tol
    if not np.any(keep):
        raise IllConditionedError(
            f"metric is numerically singular: largest |eigenvalue| {np.max(np.abs(bvals)):.3e} <= {metric_tol:.1e}"
        )
    kept = bvals[keep]
    min_kept = float(np.min(np.abs(kept)))
    xform = bvecs[:, keep] / np.sqrt(np.abs(kept))
    signs = np.sign(kept)
    reduced = signs[:, None] * (xform.conj().T @ a @ xform)
    w, z = np.linalg.eig(reduced)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.any(np.abs(w.imag) > 1e-6 * scale):
        raise IllConditionedError(
            "secular equation has complex eigenvalues (unstable or near-degenerate reference); "
            f"smallest retained metric eigenvalue {min_kept:.3e}"
        )
    w = w.real
    small = np.abs(w) < 1e-9
    if np.any(small):
        warnings.warn(f"dropping {int(small.sum())} near-zero secular eigenvalue(s)", RuntimeWarning, stacklevel=2)
    pos = np.flatnonzero(w > 1e-9)
    pos = pos[np.argsort(w[pos])]
    coeffs = xform @ z[:, pos]
    # normalize to unit metric norm c^† B c = 1
    norms = np.real(np.einsum("ik,ij,jk->k", coeffs.conj(), b, coeffs))
    coeffs = coeffs / np.sqrt(np.abs(norms) + 1e-300)
    return EomSolution(
        energies=w[pos],
        X=coeffs[:k],
        Y=coeffs[k:],
        all_eigenvalues=np.sort(w),
        retained_dim=int(keep.sum()),
        discarded_dim=int((~keep).sum()),
        min_retained_metric=min_kept,
        metric_condition=float(np.max(np.abs(kept)) / min_kept),
        dropped_small=int(small.sum()),
    )


def excited_energies(e0: float, gaps: Sequence[float]) -> np.ndarray:
    """Absolute energies ``[E0, E0 + gap_1, ...]``."""
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size > 1 and np.any(np.diff(gaps) < 0):
        raise ValueError("gaps must be sorted ascending")
    return np.concatenate([[float(e0)], e0 + gaps])


def qeom_gaps(
    state: QuantumState,
    h: PauliSum,
    basis: Sequence[ExcitationOp],
    estimator: Estimator | None = None,
    metric_tol: float = 1e-7,
) -> EomSolution:
    return solve_secular(build_matrices(state, h, basis, estimator), metric_tol)


def collapse_degenerate(values: Sequence[float], tol: float = 1e-6) -> list[tuple[float, int]]:
    """Group ascending values closer than ``tol`` into ``(mean, multiplicity)`` pairs."""
    out: list[list[float]] = []
    for v in values:
        if out and abs(v - out[-1][-1]) < tol:
            out[-1].append(v)
        else:
            out.append([v])
    return [(float(np.mean(g)), len(g)) for g in out]
