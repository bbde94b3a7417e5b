"""Trial-state circuits: first-order UCCSD, the compressed single-block LiH
circuit, and the optimizer that fits a compressed block to a UCC double.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize

from qeomsim.fermion import ExcitationOp, jordan_wigner
from qeomsim.simulator import Circuit, u3, u3_inverse_angles

_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class AnsatzSpec:
    """Excitations with parameter names, and the reference determinant.

    ``reference`` is an occupation bitstring with qubit 0 leftmost.
    """

    excitations: tuple[tuple[ExcitationOp, str], ...]
    reference: str
    trotter_order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "excitations", tuple((e, str(name)) for e, name in self.excitations))
        names = [name for _, name in self.excitations]
        if len(set(names)) != len(names):
            raise ValueError("parameter names must be unique")
        if not self.reference or set(self.reference) - {"0", "1"}:
            raise ValueError(f"bad reference bitstring {self.reference!r}")
        if self.trotter_order != 1:
            raise ValueError("only first-order Trotterization is supported")
        for e, _ in self.excitations:
            if max(e.occupied + e.virtual) >= self.n_qubits:
                raise ValueError(f"excitation {e.label} exceeds {self.n_qubits} qubits")

    @classmethod
    def from_basis(cls, basis: Sequence[ExcitationOp], reference: str, prefix: str = "t") -> "AnsatzSpec":
        return cls(tuple((e, f"{prefix}{k}") for k, e in enumerate(basis)), reference)

    @property
    def n_qubits(self) -> int:
        return len(self.reference)

    @property
    def parameters(self) -> list[str]:
        return [name for _, name in self.excitations]


def reference_circuit(reference: str) -> Circuit:
    circ = Circuit(len(reference))
    for q, bit in enumerate(reference):
        if bit == "1":
            circ.x(q)
    return circ


def append_pauli_rotation(circ: Circuit, label: str, param: str | float, scale: float = 1.0) -> Circuit:
    """Append ``exp(-i (scale * param) / 2 * P)`` using a CNOT ladder over the support of ``P``."""
    support = [q for q, ch in enumerate(label) if ch != "I"]
    if not support:
        return circ
    for q in support:
        if label[q] == "X":
            circ.h(q)
        elif label[q] == "Y":
            circ.rx(q, np.pi / 2)
    for a, b in zip(support, support[1:]):
        circ.cnot(a, b)
    circ.rz(support[-1], param, scale)
    for a, b in reversed(list(zip(support, support[1:]))):
        circ.cnot(a, b)
    for q in support:
        if label[q] == "X":
            circ.h(q)
        elif label[q] == "Y":
            circ.rx(q, -np.pi / 2)
    return circ


def uccsd_circuit(spec: AnsatzSpec) -> Circuit:
    """Reference preparation followed by ``exp(theta_k (E_k - E_k^†))`` for each excitation.

    The JW image of ``E - E^†`` is ``sum_j i b_j P_j`` with real ``b_j``; the
    terms of one excitation commute, and each becomes one rotation block with
    ``RZ(-2 b_j theta)``.  Terms are emitted in lexicographic label order.
    """
    n = spec.n_qubits
    circ = reference_circuit(spec.reference)
    for e, name in spec.excitations:
        if not e.conserves_spin():
            raise ValueError(f"excitation {e.label} does not conserve spin")
        gen = jordan_wigner(e.to_fermion() - e.adjoint(), n)
        for label, coeff in gen:
            if abs(coeff.real) > 1e-12:
                raise ValueError("generator is not anti-Hermitian")
            append_pauli_rotation(circ, label, name, -2.0 * coeff.imag)
    return circ


# -- compressed single-block circuit ---------------------------------------------------------


@dataclass(frozen=True)
class CompressedBlock:
    """Single entangling block ``U(Phi)^† · CNOT ladder · RZ(theta) · CNOT ladder · U(Phi)``.

    ``phis[q] = (theta_q, phi_q, lambda_q)`` are U3 angles for qubit ``line[q]``.
    The pre-rotation is ``U3(Phi_q)``; the post-rotation is its inverse.
    """

    phis: tuple[tuple[float, float, float], ...]
    line: tuple[int, ...] = (0, 1, 2, 3)
    reference: str = "0101"
    param: str = "theta"

    def __post_init__(self):
        object.__setattr__(self, "phis", tuple(tuple(float(a) for a in p) for p in self.phis))
        object.__setattr__(self, "line", tuple(self.line))
        if len(self.phis) != len(self.line) or any(len(p) != 3 for p in self.phis):
            raise ValueError("one (theta, phi, lambda) triple per entangler qubit required")
        if len(self.line) < 2 or len(set(self.line)) != len(self.line):
            raise ValueError("entangler line needs at least two distinct qubits")

    @property
    def n_qubits(self) -> int:
        return len(self.reference)

    def circuit(self, theta: float | str | None = None) -> Circuit:
        theta = self.param if theta is None else theta
        circ = reference_circuit(self.reference)
        for q, phi in zip(self.line, self.phis):
            circ.u3(q, *phi)
        for a, b in zip(self.line, self.line[1:]):
            circ.cnot(a, b)
        circ.rz(self.line[-1], theta)
        for a, b in reversed(list(zip(self.line, self.line[1:]))):
            circ.cnot(a, b)
        for q, phi in zip(self.line, self.phis):
            circ.u3(q, *u3_inverse_angles(*phi))
        return circ

    def to_json(self) -> dict:
        return {"phis": [list(p) for p in self.phis], "line": list(self.line),
                "reference": self.reference, "param": self.param}

    @classmethod
    def from_json(cls, data: dict) -> "CompressedBlock":
        return cls(tuple(tuple(p) for p in data["phis"]), tuple(data.get("line", (0, 1, 2, 3))),
                   data.get("reference", "0101"), data.get("param", "theta"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "CompressedBlock":
        return cls.from_json(json.loads(Path(path).read_text()))


PUBLISHED_BLOCK = CompressedBlock(
    phis=(
        (np.pi / 2, 0.0, 0.930),
        (-np.pi / 2, np.pi, -1.207),
        (-np.pi / 2, -np.pi, 1.310),
        (-np.pi / 2, 0.0, 1.877),
    )
)


def reduced_lih_circuit(theta: float | str = "theta", block: CompressedBlock = PUBLISHED_BLOCK) -> Circuit:
    """Four-qubit LiH trial circuit: 6 CNOTs, 8 fixed U3 rotations, one RZ(theta)."""
    return block.circuit(theta)


# -- block compression -----------------------------------------------------------------------


def _basis_vector(bits: str) -> np.ndarray:
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def double_excitation_target(excitation: ExcitationOp, reference: str) -> tuple[np.ndarray, np.ndarray]:
    """``(|ref>, G|ref>)`` with ``G`` the JW image of ``E - E^†``."""
    n = len(reference)
    ref = _basis_vector(reference)
    gen = jordan_wigner(excitation.to_fermion() - excitation.adjoint(), n).to_dense()
    return ref, gen @ ref


def block_overlaps(phis: np.ndarray, reference: str, line: Sequence[int], target: np.ndarray) -> tuple[complex, complex]:
    """``(<ref|w>, <target|w>)`` where ``w = ⊗_q U_q^† Z U_q |ref>`` on the entangler line."""
    w = np.ones(1, dtype=complex)
    angles = np.asarray(phis).reshape(-1, 3)
    where = {q: k for k, q in enumerate(line)}
    for q, bit in enumerate(reference):
        v = np.array([0, 1] if bit == "1" else [1, 0], dtype=complex)
        if q in where:
            u = u3(*angles[where[q]])
            v = u.conj().T @ _Z @ u @ v
        else:
            raise ValueError("the entangler line must cover the register")
        w = np.kron(w, v)
    ref = _basis_vector(reference)
    return np.vdot(ref, w), np.vdot(target, w)


def block_fidelities(phis, reference, line, dbl: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Fidelity of the block state with ``cos(t/2)|ref> + sin(t/2)|dbl>`` at each ``t``.

    The block state is ``cos(t/2)|ref> - i sin(t/2)|w>`` in closed form.
    """
    r_w, d_w = block_overlaps(phis, reference, line, dbl)
    c, s = np.cos(thetas / 2), np.sin(thetas / 2)
    amp = c * c - 1j * c * s * r_w - 1j * s * s * d_w
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


@dataclass
class CompressionResult:
    block: CompressedBlock
    worst_fidelity: float
    mean_fidelity: float
    converged: bool
    thetas: np.ndarray = field(repr=False, default=None)


def compress_block(
    excitation: ExcitationOp | None = None,
    reference: str = "0101",
    seed: int = 0,
    n_grid: int = 17,
    n_starts: int = 8,
    line: Sequence[int] = (0, 1, 2, 3),
) -> CompressionResult:
    """Fit the 12 fixed angles of a single block to a one-parameter UCC double.

    The target family is ``exp((t/2)(E - E^†))|ref>`` (half angle, so one
    period of the block's ``RZ(t)`` matches one period of the target).  The
    objective is the mean infidelity over ``n_grid`` equally spaced ``t`` in
    ``[-pi, pi]``; the best of ``n_starts`` seeded local searches is kept.
    """
    if excitation is None:
        occ = tuple(q for q, b in enumerate(reference) if b == "1")
        virt = tuple(q for q, b in enumerate(reference) if b == "0")
        excitation = ExcitationOp(occ[:2], virt[:2])
    if excitation.degree != 2:
        raise ValueError("compress_block targets a double excitation")
    _, dbl = double_excitation_target(excitation, reference)
    dbl = dbl / np.linalg.norm(dbl)
    thetas = np.linspace(-np.pi, np.pi, n_grid)

    def loss(x):
        return float(np.mean(1 - block_fidelities(x, reference, line, dbl, thetas)))

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_starts):
        x0 = rng.uniform(-np.pi, np.pi, size=3 * len(line))
        res = optimize.minimize(loss, x0, method="L-BFGS-B", options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
    phis = tuple(tuple(float(a) for a in best.x[3 * k: 3 * k + 3]) for k in range(len(line)))
    fids = block_fidelities(best.x, reference, line, dbl, thetas)
    block = CompressedBlock(phis, tuple(line), reference)
    converged = bool(best.success or best.fun < 1e-10)
    return CompressionResult(block, float(fids.min()), float(fids.mean()), converged, thetas)
