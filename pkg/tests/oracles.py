"""Independent dense constructions used as test oracles."""

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    return reduce(np.kron, mats)


def dense_label(label: str) -> np.ndarray:
    """Leftmost character acts on the most significant tensor factor."""
    return kron_all([PAULI[c] for c in label])


def dense_sum(terms: dict, n: int) -> np.ndarray:
    out = np.zeros((2**n, 2**n), dtype=complex)
    for label, c in terms.items():
        out += c * dense_label(label)
    return out


def annihilator(j: int, n: int) -> np.ndarray:
    """Fermionic annihilator on mode ``j``; occupied is |1>, parity string on modes < j."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    return kron_all([Z] * j + [lower] + [I2] * (n - j - 1))


def fock_state(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v
