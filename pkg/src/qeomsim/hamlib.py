"""Qubit Hamiltonian records: JSON I/O, embedded data, active-space projection
and sector-resolved exact diagonalization.

Embedded coefficients exclude frozen-core and nuclear-repulsion shifts, so
absolute energies differ from total molecular energies by a per-geometry
constant.  Energy gaps are unaffected.

File format (JSON)::

    {"name": str, "geometry": float, "n_qubits": int, "shift": float,
     "metadata": {...},
     "terms": [{"label": "IZXX", "re": -0.03169, "im": 0.0}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from qeomsim.errors import DenseCapError, ParseError
from qeomsim.fermion import jordan_wigner, number_operator
from qeomsim.pauli import ALPHABET, DENSE_QUBIT_CAP, PauliSum, diagonal, to_dense

EMBEDDED = ("h2_0.75", "lih_reduced_1.6")


@dataclass
class HamiltonianRecord:
    name: str
    geometry: float | None
    hamiltonian: PauliSum
    shift: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.hamiltonian.is_hermitian():
            raise ValueError(f"Hamiltonian {self.name!r} is not Hermitian")

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    @property
    def reference(self) -> str | None:
        """Hartree-Fock occupation bitstring (qubit 0 leftmost), if recorded."""
        return self.metadata.get("reference")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "geometry": self.geometry,
            "n_qubits": self.n_qubits,
            "shift": self.shift,
            "metadata": self.metadata,
            "terms": [
                {"label": label, "re": float(c.real), "im": float(c.imag)} for label, c in self.hamiltonian
            ],
        }


def _line_of(text: str, needle: str, start: int = 0) -> int | None:
    pos = text.find(needle, start)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def loads(text: str) -> HamiltonianRecord:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    for key in ("name", "n_qubits", "terms"):
        if key not in data:
            raise ParseError(f"missing key {key!r}")
    n = int(data["n_qubits"])
    terms = []
    cursor = 0
    for entry in data["terms"]:
        label = entry.get("label")
        line = _line_of(text, f'"{label}"', cursor) if isinstance(label, str) else None
        if line is not None:
            cursor = text.find(f'"{label}"', cursor) + 1
        if not isinstance(label, str) or len(label) != n or set(label) - ALPHABET:
            raise ParseError(f"invalid Pauli label {label!r} for {n} qubits", line)
        try:
            coeff = complex(float(entry["re"]), float(entry.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad coefficient for {label!r}: {exc}", line) from exc
        if not np.isfinite(coeff):
            raise ParseError(f"non-finite coefficient for {label!r}", line)
        terms.append((label, coeff))
    return HamiltonianRecord(
        name=data["name"],
        geometry=data.get("geometry"),
        hamiltonian=PauliSum(terms, n),
        shift=float(data.get("shift", 0.0)),
        metadata=dict(data.get("metadata", {})),
    )


def load(path: str | Path) -> HamiltonianRecord:
    return loads(Path(path).read_text())


def dumps(record: HamiltonianRecord) -> str:
    return json.dumps(record.to_json(), indent=1) + "\n"


def save(record: HamiltonianRecord, path: str | Path) -> None:
    Path(path).write_text(dumps(record))


def embedded(name: str) -> HamiltonianRecord:
    """Published 4-qubit Hamiltonians: ``"h2_0.75"`` or ``"lih_reduced_1.6"``."""
    if name not in EMBEDDED:
        raise KeyError(f"unknown embedded Hamiltonian {name!r}; choose from {EMBEDDED}")
    text = resources.files("qeomsim").joinpath("data", f"{name}.json").read_text()
    return loads(text)


def resolve(source: str) -> HamiltonianRecord:
    """Embedded name or path to a JSON record."""
    if source in EMBEDDED:
        return embedded(source)
    path = Path(source)
    if not path.is_file():
        raise FileNotFoundError(f"no embedded Hamiltonian or file named {source!r}")
    return load(path)


def project_active(h: PauliSum, active: Sequence[int]) -> PauliSum:
    """Restrict ``h`` to ``active`` qubits with every other qubit fixed in ``|0>``.

    Terms with X or Y on an inert qubit vanish; Z and I there contribute 1.
    """
    active = list(active)
    n = h.n_qubits
    if len(set(active)) != len(active) or any(not 0 <= q < n for q in active):
        raise ValueError("active indices must be distinct and within the register")
    inert = [q for q in range(n) if q not in active]
    out: dict[str, complex] = {}
    for label, coeff in h:
        if any(label[q] in "XY" for q in inert):
            continue
        sub = "".join(label[q] for q in active)
        out[sub] = out.get(sub, 0j) + coeff
    return PauliSum(out, len(active))


def exact_spectrum(h: PauliSum, max_qubits: int = DENSE_QUBIT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and column eigenvectors of the dense matrix."""
    if h.n_qubits > max_qubits:
        raise DenseCapError(f"{h.n_qubits} qubits exceeds the dense cap of {max_qubits}")
    return np.linalg.eigh(to_dense(h, max_qubits))


@dataclass(frozen=True)
class SectorSpec:
    """Electron number and, optionally, ``S_z`` (in units of hbar)."""

    n_electrons: int
    sz: float | None = None

    def check(self, n_qubits: int) -> None:
        n_a = n_qubits // 2
        if not 0 <= self.n_electrons <= n_qubits:
            raise ValueError(f"{self.n_electrons} electrons do not fit {n_qubits} spin-orbitals")
        if self.sz is not None:
            n_alpha = self.n_electrons / 2 + self.sz
            if n_alpha != int(n_alpha) or not (0 <= n_alpha <= n_a and 0 <= self.n_electrons - n_alpha <= n_qubits - n_a):
                raise ValueError(f"S_z = {self.sz} unreachable with {self.n_electrons} electrons")


def sector_diagonals(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Computational-basis diagonals of ``N`` and ``S_z`` (block spin order)."""
    n_a = n_qubits // 2
    n_alpha = diagonal(jordan_wigner(number_operator(n_qubits, range(n_a)), n_qubits)).real
    n_beta = diagonal(jordan_wigner(number_operator(n_qubits, range(n_a, n_qubits)), n_qubits)).real
    return n_alpha + n_beta, 0.5 * (n_alpha - n_beta)


def sector_mask(n_qubits: int, spec: SectorSpec) -> np.ndarray:
    n_op, sz_op = sector_diagonals(n_qubits)
    mask = np.abs(n_op - spec.n_electrons) < 1e-6
    if spec.sz is not None:
        mask &= np.abs(sz_op - spec.sz) < 1e-6
    return mask


def sector_filter(
    eigvals: np.ndarray,
    eigvecs: np.ndarray,
    spec: SectorSpec | None,
    degeneracy_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs belonging to the ``spec`` sector.

    Degenerate clusters are handled by projecting the whole cluster onto the
    sector and keeping an orthonormal basis of the projected subspace, so the
    result does not depend on how the eigensolver rotated the cluster.
    """
    if spec is None:
        return eigvals, eigvecs
    n_qubits = int(np.log2(eigvecs.shape[0]))
    spec.check(n_qubits)
    mask = sector_mask(n_qubits, spec).astype(float)
    vals, vecs = [], []
    start = 0
    while start < len(eigvals):
        stop = start + 1
        while stop < len(eigvals) and eigvals[stop] - eigvals[stop - 1] < degeneracy_tol:
            stop += 1
        block = eigvecs[:, start:stop] * mask[:, None]
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        keep = s > 1 - 1e-6
        for k in np.flatnonzero(keep):
            vals.append(float(np.mean(eigvals[start:stop])))
            vecs.append(u[:, k])
        start = stop
    if not vals:
        return np.zeros(0), np.zeros((eigvecs.shape[0], 0), dtype=eigvecs.dtype)
    return np.array(vals), np.column_stack(vecs)


def sector_spectrum(h: PauliSum, spec: SectorSpec | None) -> tuple[np.ndarray, np.ndarray]:
    """Exact eigenpairs of ``h`` restricted to a sector."""
    return sector_filter(*exact_spectrum(h), spec)


def hf_reference(record: HamiltonianRecord) -> str:
    """Recorded reference determinant, defaulting to the lowest spin-orbital of each spin block."""
    if record.reference:
        return record.reference
    n = record.n_qubits
    n_a = n // 2
    return "".join("1" if q in (0, n_a) else "0" for q in range(n))
