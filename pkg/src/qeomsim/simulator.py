"""Statevector and density-matrix circuit simulation with depolarizing noise,
exact and shot-sampled Pauli expectations, and readout-error handling.

Qubit 0 is the leftmost Pauli character and the most significant bit of a
basis index, so a state reshaped to ``(2,) * n`` has qubit ``q`` on axis ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from qeomsim.errors import (
    DenseCapError,
    DimensionError,
    ModeMismatchError,
    NonHermitianError,
    SingularCalibrationError,
    UnboundParameterError,
)
from qeomsim.pauli import PauliSum, label_phases, pauli_masks, qubitwise_commute

DENSITY_QUBIT_CAP = 8
ROTATIONS = ("RX", "RY", "RZ")
GATE_KINDS = ("RX", "RY", "RZ", "H", "X", "CNOT", "U3")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SDG = np.diag([1, -1j])
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def rx(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    """Generic single-qubit rotation ``RZ(phi) RY(theta) RZ(lam)`` up to global phase."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]]
    )


def u3_inverse_angles(theta: float, phi: float, lam: float) -> tuple[float, float, float]:
    """Angles with ``u3(*u3_inverse_angles(t, p, l)) == u3(t, p, l)^†``."""
    return (-theta, -lam, -phi)


@dataclass(frozen=True)
class Gate:
    """One gate.  Rotation angles are ``angle`` or ``scale * value(param)``.

    ``U3`` carries its three fixed angles in ``angles``.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    param: str | None = None
    scale: float = 1.0
    angles: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} acts on {want} qubit(s)")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT control and target must differ")
        if self.kind in ROTATIONS and self.angle is None and self.param is None:
            raise ValueError(f"{self.kind} needs an angle or a parameter name")
        if self.kind == "U3" and (self.angles is None or len(self.angles) != 3):
            raise ValueError("U3 needs three angles")

    @property
    def is_parametric(self) -> bool:
        return self.param is not None

    def resolved_angle(self, values: Mapping[str, float] | None = None) -> float | None:
        if self.param is None:
            return self.angle
        if values is None or self.param not in values:
            raise UnboundParameterError(self.param)
        return self.scale * float(values[self.param])

    def matrix(self, values: Mapping[str, float] | None = None) -> np.ndarray:
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return _X
        if self.kind == "CNOT":
            return _CNOT
        if self.kind == "U3":
            return u3(*self.angles)
        return {"RX": rx, "RY": ry, "RZ": rz}[self.kind](self.resolved_angle(values))


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def _append(self, gate: Gate) -> "Circuit":
        if any(not 0 <= q < self.n_qubits for q in gate.qubits):
            raise DimensionError(f"gate {gate.kind} on {gate.qubits} outside {self.n_qubits} qubits")
        self.gates.append(gate)
        return self

    def append(self, gate: Gate) -> "Circuit":
        return self._append(gate)

    def h(self, q: int) -> "Circuit":
        return self._append(Gate("H", (q,)))

    def x(self, q: int) -> "Circuit":
        return self._append(Gate("X", (q,)))

    def cnot(self, control: int, target: int) -> "Circuit":
        return self._append(Gate("CNOT", (control, target)))

    def rotation(self, kind: str, q: int, angle: float | str, scale: float = 1.0) -> "Circuit":
        if isinstance(angle, str):
            return self._append(Gate(kind, (q,), param=angle, scale=scale))
        return self._append(Gate(kind, (q,), angle=scale * float(angle)))

    def rx(self, q, angle, scale=1.0):
        return self.rotation("RX", q, angle, scale)

    def ry(self, q, angle, scale=1.0):
        return self.rotation("RY", q, angle, scale)

    def rz(self, q, angle, scale=1.0):
        return self.rotation("RZ", q, angle, scale)

    def u3(self, q: int, theta: float, phi: float, lam: float) -> "Circuit":
        return self._append(Gate("U3", (q,), angles=(float(theta), float(phi), float(lam))))

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise DimensionError("register sizes differ")
        self.gates.extend(other.gates)
        return self

    @property
    def parameters(self) -> list[str]:
        """Parameter names in order of first appearance."""
        return list(dict.fromkeys(g.param for g in self.gates if g.param is not None))

    def bind(self, values: Mapping[str, float] | Sequence[float]) -> "Circuit":
        """Copy with every parametric angle replaced by its value."""
        if not isinstance(values, Mapping):
            names = self.parameters
            if len(values) != len(names):
                raise ValueError(f"expected {len(names)} values, got {len(values)}")
            values = dict(zip(names, values))
        gates = [
            replace(g, angle=g.resolved_angle(values), param=None, scale=1.0) if g.param else g
            for g in self.gates
        ]
        return Circuit(self.n_qubits, gates)

    def count(self, kind: str | None = None) -> int:
        return len(self.gates) if kind is None else sum(g.kind == kind for g in self.gates)

    def unitary(self, values: Mapping[str, float] | None = None) -> np.ndarray:
        """Dense unitary (test oracle), built column by column."""
        dim = 1 << self.n_qubits
        cols = [run(self, QuantumState.basis(k, self.n_qubits), values=values).data for k in range(dim)]
        return np.column_stack(cols)


class QuantumState:
    """Pure statevector or density matrix on ``n_qubits``."""

    __slots__ = ("mode", "data", "n_qubits")

    def __init__(self, data: np.ndarray, mode: str | None = None, validate: bool = True):
        data = np.asarray(data, dtype=complex)
        if mode is None:
            mode = "density" if data.ndim == 2 else "statevector"
        if mode not in ("statevector", "density"):
            raise ValueError(f"unknown state mode {mode!r}")
        dim = data.shape[0]
        n = int(round(np.log2(dim))) if dim else -1
        if dim < 1 or 1 << n != dim:
            raise DimensionError(f"state dimension {dim} is not a power of two")
        if (mode == "statevector") != (data.ndim == 1) or (data.ndim == 2 and data.shape != (dim, dim)):
            raise DimensionError(f"array of shape {data.shape} does not fit mode {mode!r}")
        self.mode, self.data, self.n_qubits = mode, data, n
        if validate:
            self.validate()

    @classmethod
    def zero(cls, n_qubits: int, mode: str = "statevector") -> "QuantumState":
        return cls.basis(0, n_qubits, mode)

    @classmethod
    def basis(cls, index: int | str, n_qubits: int | None = None, mode: str = "statevector") -> "QuantumState":
        if isinstance(index, str):
            n_qubits = len(index)
            index = int(index, 2) if index else 0
        if mode == "density" and n_qubits > DENSITY_QUBIT_CAP:
            raise DenseCapError(f"density mode capped at {DENSITY_QUBIT_CAP} qubits")
        dim = 1 << n_qubits
        if mode == "statevector":
            v = np.zeros(dim, dtype=complex)
            v[index] = 1
            return cls(v, mode, validate=False)
        rho = np.zeros((dim, dim), dtype=complex)
        rho[index, index] = 1
        return cls(rho, mode, validate=False)

    def validate(self, tol: float = 1e-10) -> None:
        if self.mode == "statevector":
            norm = np.linalg.norm(self.data)
            if abs(norm - 1) > tol:
                raise ValueError(f"statevector norm {norm} differs from 1")
            return
        rho = self.data
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > tol:
            raise ValueError(f"density matrix trace {np.trace(rho).real} differs from 1")
        if np.linalg.eigvalsh(rho)[0] < -1e-9:
            raise ValueError("density matrix is not positive semidefinite")

    def to_density(self) -> "QuantumState":
        if self.mode == "density":
            return self
        if self.n_qubits > DENSITY_QUBIT_CAP:
            raise DenseCapError(f"density mode capped at {DENSITY_QUBIT_CAP} qubits")
        return QuantumState(np.outer(self.data, self.data.conj()), "density", validate=False)

    def probabilities(self) -> np.ndarray:
        if self.mode == "statevector":
            p = np.abs(self.data) ** 2
        else:
            p = np.real(np.diag(self.data)).copy()
        p = np.clip(p, 0, None)
        return p / p.sum()

    def __repr__(self) -> str:
        return f"QuantumState(mode={self.mode!r}, n_qubits={self.n_qubits})"


# -- noise ----------------------------------------------------------------------------------

# Randomized-benchmarking error per gate on the five-qubit device, keyed by
# stretch factor; single-qubit entries by device qubit, CNOT entries by (control, target).
DEVICE_SINGLE = {
    1.0: {0: 0.0016, 1: 0.0007, 2: 0.0011, 5: 0.0008},
    1.25: {0: 0.0023, 1: 0.0010, 2: 0.0013, 5: 0.0011},
    1.5: {0: 0.0028, 1: 0.0012, 2: 0.0018, 5: 0.0013},
}
DEVICE_CNOT = {
    1.0: {(2, 1): 0.031, (1, 0): 0.037, (0, 5): 0.038},
    1.25: {(2, 1): 0.030, (1, 0): 0.038, (0, 5): 0.043},
    1.5: {(2, 1): 0.032, (1, 0): 0.042, (0, 5): 0.048},
}
# circuit qubit -> device qubit, chosen so the CNOT chain 0-1-2-3 maps onto 2-1-0-5
DEVICE_LAYOUT = (2, 1, 0, 5)


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing gate noise plus symmetric readout bit flips.

    ``p1[q]`` is the error per single-qubit gate on ``q``; ``p2[(a, b)]`` the
    error per two-qubit gate on that pair (either orientation).  With
    ``scaling="linear"`` the effective rate is ``min(1, p * stretch)``; with
    ``scaling="table"`` each rate is interpolated in ``stretch`` from
    ``table`` (a map ``c -> (p1, p2)``), the base rates being unused.
    """

    p1: Mapping[int, float] = field(default_factory=dict)
    p2: Mapping[tuple[int, int], float] = field(default_factory=dict)
    default_p1: float = 0.0
    default_p2: float = 0.0
    readout: float | Sequence[float] = 0.0
    stretch: float = 1.0
    scaling: str = "linear"
    table: Mapping[float, tuple[Mapping[int, float], Mapping[tuple[int, int], float]]] | None = None

    def __post_init__(self):
        rates = list(self.p1.values()) + list(self.p2.values()) + [self.default_p1, self.default_p2]
        if any(not 0 <= p <= 1 for p in rates):
            raise ValueError("depolarizing rates must lie in [0, 1]")
        eps = np.atleast_1d(self.readout)
        if np.any(eps < 0) or np.any(eps > 1):
            raise ValueError("readout error must lie in [0, 1]")
        if self.stretch < 1 and self.stretch != 0:
            raise ValueError("stretch factor must be >= 1 (or 0 for the noiseless limit)")
        if self.scaling not in ("linear", "table"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if self.scaling == "table" and not self.table:
            raise ValueError("table scaling needs a rate table")

    @classmethod
    def from_device(cls, stretch: float = 1.0, scaling: str = "linear", readout: float = 0.05) -> "NoiseModel":
        """Four-qubit model with the device rates at ``c = 1`` mapped through :data:`DEVICE_LAYOUT`."""
        table = {c: _map_table(DEVICE_SINGLE[c], DEVICE_CNOT[c]) for c in DEVICE_SINGLE}
        p1, p2 = table[1.0]
        return cls(p1=p1, p2=p2, readout=readout, stretch=stretch, scaling=scaling, table=table)

    def with_stretch(self, c: float) -> "NoiseModel":
        return replace(self, stretch=c)

    def _base_rate(self, qubits: tuple[int, ...], p1, p2, strict: bool = False) -> float:
        if len(qubits) == 1:
            return p1.get(qubits[0], self.default_p1)
        key = tuple(qubits)
        if key in p2:
            return p2[key]
        return p2.get(key[::-1], self.default_p2)

    def rate(self, qubits: tuple[int, ...]) -> float:
        """Effective depolarizing probability for a gate on ``qubits``."""
        if self.scaling == "linear":
            return min(1.0, self._base_rate(qubits, self.p1, self.p2) * self.stretch)
        cs = sorted(self.table)
        ps = [self._base_rate(qubits, *self.table[c]) for c in cs]
        return float(min(1.0, max(0.0, np.interp(self.stretch, cs, ps))))

    def readout_errors(self, n_qubits: int) -> np.ndarray:
        eps = np.atleast_1d(np.asarray(self.readout, dtype=float))
        if eps.size == 1:
            return np.full(n_qubits, eps[0])
        if eps.size != n_qubits:
            raise DimensionError(f"{eps.size} readout rates for {n_qubits} qubits")
        return eps

    @property
    def is_noiseless(self) -> bool:
        if self.stretch == 0:
            return True
        if self.scaling == "table":
            return False
        return not any(self.p1.values()) and not any(self.p2.values()) and not self.default_p1 and not self.default_p2


def _map_table(single: Mapping[int, float], cnot: Mapping[tuple[int, int], float]):
    where = {dev: q for q, dev in enumerate(DEVICE_LAYOUT)}
    p1 = {where[d]: p for d, p in single.items() if d in where}
    p2 = {(where[a], where[b]): p for (a, b), p in cnot.items() if a in where and b in where}
    return p1, p2


# -- execution ------------------------------------------------------------------------------


def _apply_statevector(psi: np.ndarray, u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    k = len(qubits)
    t = psi.reshape((2,) * n)
    t = np.tensordot(u.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(t, list(range(k)), list(qubits)).reshape(-1)


def _apply_density(rho: np.ndarray, u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    k = len(qubits)
    t = rho.reshape((2,) * (2 * n))
    ut = u.reshape((2,) * (2 * k))
    t = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), list(qubits)))
    t = np.moveaxis(t, list(range(k)), list(qubits))
    cols = [n + q for q in qubits]
    t = np.tensordot(t, ut.conj(), axes=(cols, list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), cols)
    return t.reshape(rho.shape)


def depolarize(rho: np.ndarray, qubits: Sequence[int], p: float, n: int) -> np.ndarray:
    """``rho -> (1-p) rho + p Tr_S(rho) ⊗ I_S / d`` on the support ``S = qubits``."""
    if p <= 0:
        return rho
    k = len(qubits)
    d = 1 << k
    axes = list(qubits) + [n + q for q in qubits]
    t = np.moveaxis(rho.reshape((2,) * (2 * n)), axes, list(range(2 * k)))
    shape = t.shape
    t = t.reshape(d, d, -1)
    reduced = np.einsum("iir->r", t)
    out = (1 - p) * t
    out[np.arange(d), np.arange(d)] += (p / d) * reduced
    out = np.moveaxis(out.reshape(shape), list(range(2 * k)), axes)
    return out.reshape(rho.shape)


def run(
    circuit: Circuit,
    initial: QuantumState,
    noise: NoiseModel | None = None,
    values: Mapping[str, float] | Sequence[float] | None = None,
) -> QuantumState:
    """Apply ``circuit`` to ``initial``; with ``noise`` each gate is followed by depolarization."""
    if circuit.n_qubits != initial.n_qubits:
        raise DimensionError(f"circuit has {circuit.n_qubits} qubits, state has {initial.n_qubits}")
    if values is not None and not isinstance(values, Mapping):
        values = dict(zip(circuit.parameters, values))
    noisy = noise is not None and not noise.is_noiseless
    if noisy and initial.mode != "density":
        raise ModeMismatchError("noisy execution requires a density-matrix state")
    n = circuit.n_qubits
    data = initial.data.copy()
    for gate in circuit.gates:
        u = gate.matrix(values)
        if initial.mode == "statevector":
            data = _apply_statevector(data, u, gate.qubits, n)
        else:
            data = _apply_density(data, u, gate.qubits, n)
            if noisy:
                data = depolarize(data, gate.qubits, noise.rate(gate.qubits), n)
    return QuantumState(data, initial.mode, validate=False)


# -- expectations ---------------------------------------------------------------------------


@lru_cache(maxsize=8192)
def _phases(label: str) -> tuple[np.ndarray, int]:
    return label_phases(label)


def pauli_expectation(state: QuantumState, label: str) -> complex:
    phases, x_mask = _phases(label)
    idx = np.arange(phases.size)
    if state.mode == "statevector":
        psi = state.data
        return complex(np.vdot(psi[idx ^ x_mask], phases * psi))
    rho = state.data
    return complex(np.sum(phases * rho[idx ^ x_mask, idx]))


def expectation_value(state: QuantumState, op: PauliSum) -> complex:
    """``<op>`` for any (not necessarily Hermitian) operator."""
    if op.n_qubits != state.n_qubits:
        raise DimensionError(f"operator on {op.n_qubits} qubits, state on {state.n_qubits}")
    return complex(sum(c * pauli_expectation(state, label) for label, c in op.terms.items()))


def expectation(state: QuantumState, op: PauliSum) -> float:
    """Exact ``<op>`` of a Hermitian operator."""
    if not op.is_hermitian():
        raise NonHermitianError("expectation requires a Hermitian operator")
    val = expectation_value(state, op)
    scale = max(1.0, sum(abs(c) for c in op.terms.values()))
    assert abs(val.imag) < 1e-9 * scale, f"imaginary residue {val.imag}"
    return float(val.real)


# -- grouping and sampling ------------------------------------------------------------------


def group_tpb(op: PauliSum | Iterable[str]) -> list[list[str]]:
    """Greedy first-fit partition of labels into qubit-wise commuting groups.

    Labels are visited in sorted order, so the grouping is deterministic.
    """
    labels = sorted(op.labels if isinstance(op, PauliSum) else set(op))
    groups: list[list[str]] = []
    for label in labels:
        for g in groups:
            if all(qubitwise_commute(label, other) for other in g):
                g.append(label)
                break
        else:
            groups.append([label])
    return groups


def group_basis(group: Sequence[str]) -> str:
    """Measurement basis covering every label of a qubit-wise commuting group."""
    n = len(group[0])
    basis = ["Z"] * n
    for label in group:
        for q, ch in enumerate(label):
            if ch != "I":
                basis[q] = ch
    return "".join(basis)


def rotate_to_basis(state: QuantumState, basis: str) -> QuantumState:
    """Rotate so that measuring in Z yields ``basis`` outcomes (X: H, Y: S^† then H)."""
    circ = Circuit(state.n_qubits)
    for q, ch in enumerate(basis):
        if ch == "X":
            circ.h(q)
        elif ch == "Y":
            circ.gates.append(Gate("RZ", (q,), angle=-np.pi / 2))
            circ.h(q)
    return run(circ, state)


def _outcome_signs(labels: Sequence[str], n_qubits: int) -> np.ndarray:
    """``signs[k, b]``: eigenvalue of ``labels[k]`` on rotated outcome ``b``."""
    idx = np.arange(1 << n_qubits)
    rows = []
    for label in labels:
        _, z, _ = pauli_masks(label.replace("X", "Z").replace("Y", "Z"))
        rows.append(1 - 2 * (np.bitwise_count(idx & z) & 1).astype(float))
    return np.array(rows)


@dataclass
class GroupSample:
    """Bitstring counts for one measurement group."""

    labels: list[str]
    basis: str
    counts: np.ndarray  # float, length 2^n; may be non-integer after readout correction
    signs: np.ndarray

    @property
    def shots(self) -> float:
        return float(self.counts.sum())

    def pauli_means(self, counts: np.ndarray | None = None) -> dict[str, float]:
        c = self.counts if counts is None else counts
        means = self.signs @ c / c.sum()
        return dict(zip(self.labels, means))


def sample_groups(
    state: QuantumState,
    labels: Iterable[str],
    shots: int,
    rng: np.random.Generator,
    noise: NoiseModel | None = None,
    correct: bool = True,
) -> list[GroupSample]:
    """Multinomial measurement record for every TPB group of ``labels``.

    With a ``noise`` model carrying a readout error the raw counts are
    corrupted and, if ``correct``, inverted through the calibration matrix.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = state.n_qubits
    eps = None if noise is None else noise.readout_errors(n)
    calib = None
    if eps is not None and np.any(eps > 0) and correct:
        calib = readout_calibration(n, noise)
    out = []
    for group in group_tpb(list(labels)):
        basis = group_basis(group)
        probs = rotate_to_basis(state, basis).probabilities()
        counts = rng.multinomial(shots, probs).astype(float)
        if eps is not None and np.any(eps > 0):
            counts = apply_readout_error(counts, noise, rng)
            if calib is not None:
                counts = correct_readout(counts, calib)
        out.append(GroupSample(group, basis, counts, _outcome_signs(group, n)))
    return out


def combine_groups(op: PauliSum, samples: Sequence[GroupSample]) -> tuple[complex, float]:
    """Estimate and standard error of ``<op>`` from group samples."""
    estimate = 0j
    var = 0.0
    for s in samples:
        coeffs = np.array([op.terms.get(label, 0.0) for label in s.labels])
        if not np.any(coeffs):
            continue
        per_outcome = coeffs @ s.signs  # value of the group observable on each outcome
        w = s.counts / s.counts.sum()
        mean = per_outcome @ w
        estimate += mean
        var += float(np.real(np.abs(per_outcome - mean) ** 2 @ w)) / s.shots
    return estimate, float(np.sqrt(var))


def sample_expectation(
    state: QuantumState,
    op: PauliSum,
    shots: int,
    seed: int | np.random.Generator | None = None,
    noise: NoiseModel | None = None,
) -> tuple[float, float]:
    """Finite-shot estimate of a Hermitian ``<op>`` and its standard error."""
    if not op.is_hermitian():
        raise NonHermitianError("sample_expectation requires a Hermitian operator")
    rng = np.random.default_rng(seed)
    samples = sample_groups(state, op.labels, shots, rng, noise)
    est, err = combine_groups(op, samples)
    return float(est.real), err


# -- readout --------------------------------------------------------------------------------


def apply_readout_error(counts: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Flip every measured bit of every shot independently with probability ``eps_q``."""
    counts = np.asarray(counts)
    dim = counts.size
    n = int(round(np.log2(dim)))
    eps = noise.readout_errors(n)
    outcomes = np.repeat(np.arange(dim), np.rint(counts).astype(np.int64))
    flips = rng.random((outcomes.size, n)) < eps
    weights = 1 << np.arange(n - 1, -1, -1)
    outcomes = outcomes ^ (flips.astype(np.int64) @ weights)
    return np.bincount(outcomes, minlength=dim).astype(float)


def readout_calibration(n_qubits: int, noise: NoiseModel) -> np.ndarray:
    """Confusion matrix ``A[measured, prepared]`` over all basis states."""
    eps = noise.readout_errors(n_qubits)
    a = np.ones((1, 1))
    for e in eps:
        a = np.kron(a, np.array([[1 - e, e], [e, 1 - e]]))
    if np.any(np.abs(eps - 0.5) < 1e-12) or np.linalg.cond(a) > 1e12:
        raise SingularCalibrationError("readout calibration matrix is singular (readout error 0.5)")
    return a


def correct_readout(counts: np.ndarray, calibration: np.ndarray) -> np.ndarray:
    """Invert the confusion matrix, clip negatives to 0 and restore the shot total."""
    counts = np.asarray(counts, dtype=float)
    try:
        fixed = np.linalg.solve(calibration, counts)
    except np.linalg.LinAlgError as exc:
        raise SingularCalibrationError(str(exc)) from exc
    fixed = np.clip(fixed, 0, None)
    total = fixed.sum()
    return fixed * (counts.sum() / total) if total > 0 else fixed
