"""Fermionic operators, Jordan-Wigner mapping and the EOM excitation basis.

Spin-orbitals use block order: modes ``0 .. n_alpha-1`` are spin-alpha, the
remaining modes are spin-beta.  An occupied mode is the qubit state ``|1>``.

Normal order (canonical form of a :class:`FermionSum` term): creation
operators to the left of annihilation operators, each group sorted by
descending mode index.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from qeomsim.errors import DimensionError, SingularityError
from qeomsim.pauli import PauliSum

Ladder = tuple[int, bool]  # (mode, is_creation)


class FermionSum:
    """Weighted sum of products of creation/annihilation operators."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[Ladder, ...], complex] | Iterable | None = None):
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        acc: dict[tuple[Ladder, ...], complex] = {}
        for ops, coeff in items:
            key = tuple((int(m), bool(c)) for m, c in ops)
            for m, _ in key:
                if m < 0:
                    raise DimensionError(f"negative mode index {m}")
            acc[key] = acc.get(key, 0j) + complex(coeff)
        self._terms = {k: v for k, v in acc.items() if v != 0}

    @classmethod
    def create(cls, mode: int) -> "FermionSum":
        return cls({((mode, True),): 1.0})

    @classmethod
    def annihilate(cls, mode: int) -> "FermionSum":
        return cls({((mode, False),): 1.0})

    @classmethod
    def product(cls, *ops: Ladder, coeff: complex = 1.0) -> "FermionSum":
        return cls({tuple(ops): coeff})

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "FermionSum":
        return cls({(): coeff})

    @property
    def terms(self) -> Mapping[tuple[Ladder, ...], complex]:
        return MappingProxyType(self._terms)

    def max_mode(self) -> int:
        return max((m for ops in self._terms for m, _ in ops), default=-1)

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "FermionSum") -> "FermionSum":
        merged = dict(self._terms)
        for k, v in other._terms.items():
            merged[k] = merged.get(k, 0j) + v
        return FermionSum(merged)

    def __neg__(self) -> "FermionSum":
        return FermionSum({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "FermionSum") -> "FermionSum":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FermionSum):
            acc: dict = {}
            for ka, va in self._terms.items():
                for kb, vb in other._terms.items():
                    acc[ka + kb] = acc.get(ka + kb, 0j) + va * vb
            return FermionSum(acc)
        return FermionSum({k: v * other for k, v in self._terms.items()})

    __matmul__ = __mul__

    def __rmul__(self, scalar):
        return self * scalar

    def adjoint(self) -> "FermionSum":
        return FermionSum(
            {tuple((m, not c) for m, c in reversed(ops)): v.conjugate() for ops, v in self._terms.items()}
        )

    def normal_ordered(self) -> "FermionSum":
        acc: dict = {}
        for ops, coeff in self._terms.items():
            for key, val in _normal_order_term(ops, coeff):
                acc[key] = acc.get(key, 0j) + val
        return FermionSum({k: v for k, v in acc.items() if abs(v) > 1e-14})

    def allclose(self, other: "FermionSum", atol: float = 1e-12) -> bool:
        a, b = self.normal_ordered()._terms, other.normal_ordered()._terms
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= atol for k in set(a) | set(b))

    def __repr__(self) -> str:
        def fmt(ops):
            return " ".join(f"a{m}^" if c else f"a{m}" for m, c in ops) or "1"

        return "FermionSum(" + " + ".join(f"({v:.6g}) {fmt(k)}" for k, v in self._terms.items()) + ")"


def _normal_order_term(ops: tuple[Ladder, ...], coeff: complex) -> list[tuple[tuple[Ladder, ...], complex]]:
    out = []
    stack = [(list(ops), coeff)]
    while stack:
        seq, c = stack.pop()
        swapped = False
        for k in range(len(seq) - 1):
            (m1, c1), (m2, c2) = seq[k], seq[k + 1]
            if c1 == c2:
                if m1 == m2:  # a_i a_i = a_i^ a_i^ = 0
                    swapped = True
                    break
                if m1 < m2:
                    seq[k], seq[k + 1] = seq[k + 1], seq[k]
                    stack.append((seq, -c))
                    swapped = True
                    break
            elif not c1 and c2:  # a_i a_j^ = delta_ij - a_j^ a_i
                swapped_seq = seq[:k] + [seq[k + 1], seq[k]] + seq[k + 2:]
                stack.append((swapped_seq, -c))
                if m1 == m2:
                    stack.append((seq[:k] + seq[k + 2:], c))
                swapped = True
                break
        if not swapped:
            out.append((tuple(seq), c))
    return out


@lru_cache(maxsize=4096)
def _ladder_image(mode: int, creation: bool, n_modes: int) -> PauliSum:
    z_tail = "Z" * mode
    rest = "I" * (n_modes - mode - 1)
    sign = -1 if creation else 1
    return PauliSum(
        {z_tail + "X" + rest: 0.5, z_tail + "Y" + rest: 0.5j * sign}, n_modes
    )


def jordan_wigner(op: FermionSum, n_modes: int) -> PauliSum:
    """Jordan-Wigner image on ``n_modes`` qubits.

    ``a_j -> (X_j + iY_j)/2 ⊗ Z_0..Z_{j-1}`` and ``a_j^ -> (X_j - iY_j)/2 ⊗ Z_0..Z_{j-1}``.
    """
    if op.max_mode() >= n_modes:
        raise DimensionError(f"mode {op.max_mode()} out of range for {n_modes} modes")
    total = PauliSum.zero(n_modes)
    for ops, coeff in op.terms.items():
        term = PauliSum.identity(n_modes, coeff)
        for mode, creation in ops:
            term = term @ _ladder_image(mode, creation, n_modes)
        total = total + term
    return total


def number_operator(n_modes: int, modes: Iterable[int] | None = None) -> FermionSum:
    modes = range(n_modes) if modes is None else modes
    return FermionSum({((m, True), (m, False)): 1.0 for m in modes})


def spin_of(mode: int, n_modes: int) -> str:
    return "a" if mode < n_modes // 2 else "b"


@dataclass(frozen=True)
class ExcitationOp:
    """Particle-conserving excitation ``a_m^ a_i`` or ``a_m^ a_n^ a_i a_j``.

    ``occupied`` holds ``(i,)`` or ``(i, j)`` and ``virtual`` holds ``(m,)`` or
    ``(m, n)``; pairs are stored ascending.
    """

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]
    spins: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if len(self.occupied) != len(self.virtual) or len(self.occupied) not in (1, 2):
            raise ValueError("excitations must be singles or doubles with #creations = #annihilations")
        if set(self.occupied) & set(self.virtual):
            raise ValueError("occupied and virtual indices must be disjoint")
        if len(set(self.occupied)) != len(self.occupied) or len(set(self.virtual)) != len(self.virtual):
            raise ValueError("repeated index in excitation")
        if list(self.occupied) != sorted(self.occupied) or list(self.virtual) != sorted(self.virtual):
            raise ValueError("excitation indices must be ascending (i<j, m<n)")
        if self.spins and len(self.spins) != 2 * self.degree:
            raise ValueError("spins must label every occupied then virtual index")

    @property
    def degree(self) -> int:
        return len(self.occupied)

    @property
    def label(self) -> str:
        return ",".join(map(str, self.occupied)) + "->" + ",".join(map(str, self.virtual))

    def conserves_spin(self) -> bool:
        if not self.spins:
            return True
        d = self.degree
        return sorted(self.spins[:d]) == sorted(self.spins[d:])

    def to_fermion(self) -> FermionSum:
        creations = tuple((m, True) for m in self.virtual)
        annihilations = tuple((i, False) for i in self.occupied)
        return FermionSum.product(*creations, *annihilations)

    def adjoint(self) -> FermionSum:
        return adjoint(self)

    def to_json(self) -> dict:
        return {"occupied": list(self.occupied), "virtual": list(self.virtual), "spins": list(self.spins)}

    @classmethod
    def from_json(cls, data: Mapping) -> "ExcitationOp":
        return cls(tuple(data["occupied"]), tuple(data["virtual"]), tuple(data.get("spins", ())))


def adjoint(e: ExcitationOp) -> FermionSum:
    """De-excitation ``(a_m^ a_i)^† = a_i^ a_m``, ``(a_m^ a_n^ a_i a_j)^† = a_i^ a_j^ a_m a_n``."""
    if e.degree == 1:
        (i,), (m,) = e.occupied, e.virtual
        return FermionSum.product((i, True), (m, False))
    (i, j), (m, n) = e.occupied, e.virtual
    return FermionSum.product((i, True), (j, True), (m, False), (n, False))


def excitation_basis(
    n_occ_alpha: int,
    n_occ_beta: int,
    n_virt_alpha: int,
    n_virt_beta: int,
    *,
    reference: str | None = None,
    spin_conserving: bool = True,
) -> list[ExcitationOp]:
    """Singles then doubles over an (occupied, virtual) spin-orbital partition.

    Modes are laid out in block order with ``n_occ_alpha + n_virt_alpha`` alpha
    modes first.  Without ``reference`` the occupied orbitals are the lowest
    indices of each spin block; with ``reference`` (an occupation bitstring)
    the occupied modes are its ``'1'`` positions, and the counts are checked
    against it.

    Ordering: singles by ascending ``(i, m)``, then doubles by ascending
    ``((i, j), (m, n))``.  With ``spin_conserving=False`` spin-flip
    excitations are admitted as well (particle number is always conserved).
    """
    for k in (n_occ_alpha, n_occ_beta, n_virt_alpha, n_virt_beta):
        if k < 0:
            raise ValueError("orbital counts must be non-negative")
    n_a = n_occ_alpha + n_virt_alpha
    n_modes = n_a + n_occ_beta + n_virt_beta
    if reference is None:
        occ = list(range(n_occ_alpha)) + list(range(n_a, n_a + n_occ_beta))
    else:
        if len(reference) != n_modes or set(reference) - {"0", "1"}:
            raise ValueError(f"reference {reference!r} does not describe {n_modes} modes")
        occ = [q for q, ch in enumerate(reference) if ch == "1"]
        if sum(q < n_a for q in occ) != n_occ_alpha or sum(q >= n_a for q in occ) != n_occ_beta:
            raise ValueError("reference occupation disagrees with the orbital counts")
    virt = [q for q in range(n_modes) if q not in occ]
    spin = ["a" if q < n_a else "b" for q in range(n_modes)]

    basis = []
    for i in occ:
        for m in virt:
            e = ExcitationOp((i,), (m,), (spin[i], spin[m]))
            if not spin_conserving or e.conserves_spin():
                basis.append(e)
    for i, j in itertools.combinations(occ, 2):
        for m, n in itertools.combinations(virt, 2):
            e = ExcitationOp((i, j), (m, n), (spin[i], spin[j], spin[m], spin[n]))
            if not spin_conserving or e.conserves_spin():
                basis.append(e)
    return basis


def basis_from_reference(reference: str, n_alpha_modes: int | None = None, spin_conserving: bool = True):
    """Excitation basis for an occupation bitstring in block spin order."""
    n = len(reference)
    n_a = n // 2 if n_alpha_modes is None else n_alpha_modes
    occ_a = reference[:n_a].count("1")
    occ_b = reference[n_a:].count("1")
    return excitation_basis(
        occ_a, occ_b, n_a - occ_a, n - n_a - occ_b, reference=reference, spin_conserving=spin_conserving
    )


@dataclass(frozen=True)
class MoIntegrals:
    """Two-electron integrals ``h2[i, j, k, l]`` and orbital energies (Hartree).

    Indices are spin-orbitals; the first ``n_occupied`` are occupied.  ``spins``
    optionally labels each orbital ``'a'``/``'b'`` so only spin-conserving
    doubles are considered.
    """

    h2: np.ndarray
    orb_energies: np.ndarray
    n_occupied: int
    spins: tuple[str, ...] = ()

    def __post_init__(self):
        h2 = np.asarray(self.h2, dtype=float)
        e = np.asarray(self.orb_energies, dtype=float)
        n = e.shape[0]
        if h2.shape != (n, n, n, n):
            raise DimensionError(f"h2 has shape {h2.shape}, expected {(n,) * 4}")
        if not (np.all(np.isfinite(h2)) and np.all(np.isfinite(e))):
            raise ValueError("integrals must be finite")
        if not 0 <= self.n_occupied <= n:
            raise ValueError("n_occupied out of range")
        if self.spins and len(self.spins) != n:
            raise ValueError("one spin label per orbital required")
        object.__setattr__(self, "h2", h2)
        object.__setattr__(self, "orb_energies", e)

    @property
    def n_orbitals(self) -> int:
        return self.orb_energies.shape[0]

    @classmethod
    def load(cls, path: str | Path) -> "MoIntegrals":
        """JSON schema: ``{"h2": [[[[...]]]], "orb_energies": [...], "n_occupied": int, "spins": [...]}``."""
        data = json.loads(Path(path).read_text())
        return cls(np.array(data["h2"]), np.array(data["orb_energies"]), int(data["n_occupied"]),
                   tuple(data.get("spins", ())))


def mp2_coefficient(ints: MoIntegrals, i: int, j: int, k: int, l: int) -> float:
    """``C_ijlk = (h_ijkl - h_ijlk) / (e_i + e_j - e_k - e_l)``."""
    e = ints.orb_energies
    denom = e[i] + e[j] - e[k] - e[l]
    if abs(denom) <= 1e-10:
        raise SingularityError(f"degenerate MP2 denominator for (i, j, k, l) = {(i, j, k, l)}")
    return (ints.h2[i, j, k, l] - ints.h2[i, j, l, k]) / denom


def mp2_select(ints: MoIntegrals) -> ExcitationOp:
    """Double excitation with the largest ``|C^MP2|``; ties go to the smallest ``(i, j, k, l)``."""
    occ = range(ints.n_occupied)
    virt = range(ints.n_occupied, ints.n_orbitals)
    best = None
    for i, j in itertools.combinations(occ, 2):
        for k, l in itertools.combinations(virt, 2):
            spins = (ints.spins[i], ints.spins[j], ints.spins[k], ints.spins[l]) if ints.spins else ()
            if spins and sorted(spins[:2]) != sorted(spins[2:]):
                continue
            mag = abs(mp2_coefficient(ints, i, j, k, l))
            # strict '>' keeps the lexicographically first tuple on ties
            if best is None or mag > best[0] + 1e-15:
                best = (mag, (i, j), (k, l), spins)
    if best is None:
        raise ValueError("no candidate double excitations")
    return ExcitationOp(best[1], best[2], best[3])


def excitation_operators(basis: Sequence[ExcitationOp], n_modes: int) -> list[PauliSum]:
    """JW images of the excitation operators of ``basis``."""
    return [jordan_wigner(e.to_fermion(), n_modes) for e in basis]
