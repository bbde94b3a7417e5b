"""Exact symbolic algebra on weighted sums of n-qubit Pauli strings.

Qubit ordering convention (used everywhere in the package): the leftmost
character of a label acts on qubit 0, and qubit 0 is the most significant bit
of a computational-basis index.  ``"XZ"`` is therefore ``X ⊗ Z`` with the
``X`` on qubit 0, and the dense matrix of a label is the Kronecker product of
its characters read left to right.
"""

from __future__ import annotations

import math
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

from qeomsim.errors import DenseCapError, DimensionError, ParseError

PRUNE_TOL = 1e-12
DENSE_QUBIT_CAP = 14
ALPHABET = frozenset("IXYZ")

# single-site products: (a, b) -> (phase, a·b)
_SITE_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

_SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_label(label: str) -> None:
    if not label or not set(label) <= ALPHABET:
        raise ValueError(f"invalid Pauli label {label!r}: expected a non-empty string over IXYZ")


@lru_cache(maxsize=1 << 16)
def _multiply_labels(a: str, b: str) -> tuple[complex, str, bool]:
    """Return ``(phase, label, anticommutes)`` with ``a·b = phase * label``."""
    phase = 1 + 0j
    out = []
    flips = 0
    for ca, cb in zip(a, b):
        p, c = _SITE_PRODUCT[ca, cb]
        if p != 1:
            flips += 1
            phase *= p
        out.append(c)
    return phase, "".join(out), bool(flips & 1)


def labels_commute(a: str, b: str) -> bool:
    """Strings commute iff they disagree (both non-identity) on an even number of sites."""
    if len(a) != len(b):
        raise DimensionError(f"label lengths differ: {len(a)} vs {len(b)}")
    return not _multiply_labels(a, b)[2]


def qubitwise_commute(a: str, b: str) -> bool:
    return all(x == "I" or y == "I" or x == y for x, y in zip(a, b))


@lru_cache(maxsize=1 << 16)
def pauli_masks(label: str) -> tuple[int, int, int]:
    """Bit masks ``(x_mask, z_mask, n_y)`` of a label.

    The string acts on basis states as ``P|b> = i**n_y (-1)**popcount(b & z_mask) |b ^ x_mask>``.
    """
    n = len(label)
    x_mask = z_mask = n_y = 0
    for q, ch in enumerate(label):
        bit = 1 << (n - 1 - q)
        if ch in "XY":
            x_mask |= bit
        if ch in "ZY":
            z_mask |= bit
        if ch == "Y":
            n_y += 1
    return x_mask, z_mask, n_y


class PauliTerm:
    """A single weighted Pauli string."""

    __slots__ = ("label", "coeff")

    def __init__(self, label: str, coeff: complex = 1.0):
        _check_label(label)
        coeff = complex(coeff)
        if not (math.isfinite(coeff.real) and math.isfinite(coeff.imag)):
            raise ValueError(f"non-finite coefficient for {label}: {coeff}")
        self.label = label
        self.coeff = coeff

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return multiply(self, other)
        return PauliTerm(self.label, self.coeff * other)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliTerm) and self.label == other.label and self.coeff == other.coeff

    def __hash__(self):
        return hash((self.label, self.coeff))

    def __repr__(self) -> str:
        return f"PauliTerm({self.label!r}, {self.coeff!r})"


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Pauli-group product with the phase folded into the coefficient."""
    if len(a.label) != len(b.label):
        raise DimensionError(f"cannot multiply {len(a.label)}- and {len(b.label)}-qubit strings")
    phase, label, _ = _multiply_labels(a.label, b.label)
    return PauliTerm(label, phase * a.coeff * b.coeff)


class PauliSum:
    """Immutable weighted sum of Pauli strings on a fixed register.

    Duplicate labels are merged at construction and coefficients with magnitude
    below ``tol`` are dropped.  Coefficients are always complex.
    """

    __slots__ = ("_terms", "_n")

    def __init__(
        self,
        terms: Mapping[str, complex] | Iterable[tuple[str, complex]] | None = None,
        n_qubits: int | None = None,
        tol: float = PRUNE_TOL,
    ):
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        acc: dict[str, complex] = {}
        n = n_qubits
        for label, coeff in items:
            if label not in acc:
                _check_label(label)
                if n is None:
                    n = len(label)
                elif len(label) != n:
                    raise DimensionError(f"label {label!r} does not fit a {n}-qubit register")
            acc[label] = acc.get(label, 0j) + complex(coeff)
        if n is None:
            raise ValueError("n_qubits is required for an empty PauliSum")
        if n < 1:
            raise ValueError("n_qubits must be positive")
        for label, coeff in acc.items():
            if not (math.isfinite(coeff.real) and math.isfinite(coeff.imag)):
                raise ValueError(f"non-finite coefficient for {label}: {coeff}")
        self._terms = {k: v for k, v in acc.items() if abs(v) >= tol}
        self._n = n

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls({"I" * n_qubits: coeff}, n_qubits)

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls({}, n_qubits)

    @classmethod
    def from_terms(cls, terms: Iterable[PauliTerm], n_qubits: int | None = None) -> "PauliSum":
        return cls(((t.label, t.coeff) for t in terms), n_qubits)

    # -- container protocol -------------------------------------------------
    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[str, complex]:
        return MappingProxyType(self._terms)

    @property
    def labels(self) -> list[str]:
        return sorted(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[str, complex]]:
        return iter(sorted(self._terms.items()))

    def __getitem__(self, label: str) -> complex:
        return self._terms.get(label, 0j)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliSum) and self._n == other._n and self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {v!r}" for k, v in self)
        return f"PauliSum({{{body}}}, n_qubits={self._n})"

    def allclose(self, other: "PauliSum", atol: float = 1e-10) -> bool:
        _same_register(self, other)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    # -- arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, PauliSum):
            _same_register(self, other)
            merged = dict(self._terms)
            for k, v in other._terms.items():
                merged[k] = merged.get(k, 0j) + v
            return PauliSum(merged, self._n)
        if np.isscalar(other):
            return self + PauliSum.identity(self._n, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "PauliSum":
        return PauliSum({k: -v for k, v in self._terms.items()}, self._n)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, PauliSum):
            return self @ scalar
        if not np.isscalar(scalar):
            return NotImplemented
        return PauliSum({k: v * scalar for k, v in self._terms.items()}, self._n)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "PauliSum":
        return self * (1.0 / scalar)

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        _same_register(self, other)
        acc: dict[str, complex] = {}
        for la, ca in self._terms.items():
            for lb, cb in other._terms.items():
                phase, lc, _ = _multiply_labels(la, lb)
                acc[lc] = acc.get(lc, 0j) + phase * ca * cb
        return PauliSum(acc, self._n)

    def adjoint(self) -> "PauliSum":
        return PauliSum({k: v.conjugate() for k, v in self._terms.items()}, self._n)

    dagger = adjoint

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(v.imag) <= tol for v in self._terms.values())

    def hermitian_part(self) -> "PauliSum":
        return PauliSum({k: v.real for k, v in self._terms.items()}, self._n)

    def prune(self, tol: float = PRUNE_TOL) -> "PauliSum":
        return prune(self, tol)

    def to_dense(self, max_qubits: int = DENSE_QUBIT_CAP) -> np.ndarray:
        return to_dense(self, max_qubits)

    def identity_coeff(self) -> complex:
        return self["I" * self._n]

    # -- text serialization -------------------------------------------------------
    def to_text(self) -> str:
        """One term per line: ``LABEL <real> <imag>``."""
        return "".join(f"{k} {v.real!r} {v.imag!r}\n" for k, v in self)

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "PauliSum":
        pairs = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) not in (2, 3):
                raise ParseError(f"expected 'LABEL real [imag]', got {raw!r}", lineno)
            label = fields[0]
            if not set(label) <= ALPHABET:
                bad = sorted(set(label) - ALPHABET)
                raise ParseError(f"invalid character(s) {bad} in label {label!r}", lineno)
            if n_qubits is not None and len(label) != n_qubits:
                raise ParseError(f"label {label!r} has length {len(label)}, expected {n_qubits}", lineno)
            if pairs and len(label) != len(pairs[0][0]):
                raise ParseError(f"label {label!r} has inconsistent length", lineno)
            try:
                re = float(fields[1])
                im = float(fields[2]) if len(fields) == 3 else 0.0
            except ValueError:
                raise ParseError(f"bad coefficient in {raw!r}", lineno) from None
            pairs.append((label, complex(re, im)))
        return cls(pairs, n_qubits)


def _same_register(a: PauliSum, b: PauliSum) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"register mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """``AB - BA``; commuting string pairs are skipped, anticommuting pairs give ``2ab``."""
    _same_register(a, b)
    acc: dict[str, complex] = {}
    for la, ca in a.terms.items():
        for lb, cb in b.terms.items():
            phase, lc, anti = _multiply_labels(la, lb)
            if anti:
                acc[lc] = acc.get(lc, 0j) + 2 * phase * ca * cb
    return PauliSum(acc, a.n_qubits)


def double_commutator(a: PauliSum, h: PauliSum, b: PauliSum) -> PauliSum:
    """Symmetrized double commutator ``[A, H, B] = ([[A, H], B] + [A, [H, B]]) / 2``."""
    _same_register(a, h)
    _same_register(h, b)
    return 0.5 * (commutator(commutator(a, h), b) + commutator(a, commutator(h, b)))


def prune(a: PauliSum, tol: float = PRUNE_TOL) -> PauliSum:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return PauliSum({k: v for k, v in a.terms.items() if abs(v) >= tol}, a.n_qubits, tol=0.0)


@lru_cache(maxsize=32)
def basis_indices(n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def label_phases(label: str) -> tuple[np.ndarray, int]:
    """Per-basis-state phases and the flip mask of a Pauli string.

    ``P|b> = phases[b] |b ^ x_mask>``.
    """
    x_mask, z_mask, n_y = pauli_masks(label)
    idx = basis_indices(len(label))
    signs = 1 - 2 * (np.bitwise_count(idx & z_mask) & 1).astype(np.int8)
    return (1j) ** n_y * signs, x_mask


def to_dense(a: PauliSum, max_qubits: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix ``sum_k c_k P_k``."""
    n = a.n_qubits
    if n > max_qubits:
        raise DenseCapError(f"{n} qubits exceeds the dense cap of {max_qubits}")
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    idx = basis_indices(n)
    for label, coeff in a.terms.items():
        phases, x_mask = label_phases(label)
        out[idx ^ x_mask, idx] += coeff * phases
    return out


def diagonal(a: PauliSum) -> np.ndarray:
    """Diagonal of ``a`` in the computational basis (off-diagonal strings ignored)."""
    out = np.zeros(1 << a.n_qubits, dtype=complex)
    for label, coeff in a.terms.items():
        phases, x_mask = label_phases(label)
        if x_mask == 0:
            out += coeff * phases
    return out


def single_qubit_matrix(ch: str) -> np.ndarray:
    return _SINGLE_QUBIT[ch].copy()


def random_pauli_sum(
    n_qubits: int, n_terms: int, rng: np.random.Generator, hermitian: bool = False
) -> PauliSum:
    """Random sum of ``n_terms`` strings with Gaussian coefficients (test helper)."""
    letters = np.array(list("IXYZ"))
    terms = []
    for _ in range(n_terms):
        label = "".join(rng.choice(letters, size=n_qubits))
        c = rng.normal()
        if not hermitian:
            c = c + 1j * rng.normal()
        terms.append((label, c))
    return PauliSum(terms, n_qubits)
