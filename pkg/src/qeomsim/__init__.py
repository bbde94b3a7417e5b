"""Simulation toolkit for quantum equation-of-motion excitation energies.

Qubit convention: the leftmost character of a Pauli label acts on qubit 0,
which is the most significant bit of a computational-basis index.
"""

from qeomsim.pauli import PauliSum, PauliTerm, commutator, double_commutator, multiply, prune, to_dense

__version__ = "0.1.0"

__all__ = [
    "PauliSum",
    "PauliTerm",
    "commutator",
    "double_commutator",
    "multiply",
    "prune",
    "to_dense",
    "__version__",
]
