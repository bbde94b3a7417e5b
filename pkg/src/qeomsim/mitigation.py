"""Zero-noise extrapolation over stretch factors, elementwise for qEOM
matrices, plus bootstrap bands from resampled shot records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from qeomsim.errors import DegenerateFitError, DimensionError, IllConditionedError
from qeomsim.fermion import ExcitationOp
from qeomsim.pauli import PauliSum
from qeomsim.qeom import MATRIX_NAMES, EomSolution, EomSystem, eom_operators, solve_secular
from qeomsim.simulator import GroupSample, NoiseModel, QuantumState, combine_groups, sample_groups

DEFAULT_STRETCH = (1.0, 1.25, 1.5)


@dataclass(frozen=True)
class StretchSeries:
    """Values (scalars or arrays) measured at stretch factors ``c >= 1``."""

    factors: tuple[float, ...]
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(float(c) for c in self.factors))
        object.__setattr__(self, "values", tuple(np.asarray(v) for v in self.values))
        if len(self.factors) != len(self.values):
            raise ValueError("one value per stretch factor required")
        if len(self.factors) < 2:
            raise ValueError("extrapolation needs at least two stretch factors")
        if any(c < 1 for c in self.factors):
            raise ValueError("stretch factors must be >= 1")
        if len({v.shape for v in self.values}) != 1:
            raise DimensionError("values at different stretch factors have different shapes")


def extrapolate(series: StretchSeries, order: int = 1) -> np.ndarray | float:
    """Least-squares polynomial of degree ``order`` in ``c``, evaluated at ``c = 0``.

    Works elementwise on arrays and on complex values.
    """
    c = np.asarray(series.factors)
    if np.unique(c).size != c.size:
        raise DegenerateFitError(f"repeated stretch factors {series.factors}")
    if not 1 <= order < c.size:
        raise DegenerateFitError(f"order {order} needs more than {order} distinct stretch factors")
    stacked = np.stack(series.values)
    shape = stacked.shape[1:]
    design = np.vander(c, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(design, stacked.reshape(c.size, -1), rcond=None)
    out = coef[0].reshape(shape)
    if not np.iscomplexobj(stacked):
        out = out.real
    return out.item() if out.ndim == 0 else out


def mitigate_eom(
    systems: Sequence[EomSystem],
    factors: Sequence[float] = DEFAULT_STRETCH,
    metric_tol: float = 1e-7,
    order: int = 1,
) -> tuple[EomSystem, EomSolution]:
    """Extrapolate M, Q, V, W elementwise to zero noise, then solve once."""
    if len(systems) != len(factors):
        raise ValueError("one EomSystem per stretch factor required")
    shapes = {s.M.shape for s in systems}
    if len(shapes) != 1:
        raise DimensionError(f"EomSystems have different sizes: {shapes}")
    labels = [tuple(s.labels) for s in systems if s.labels]
    if len(set(labels)) > 1:
        raise DimensionError("EomSystems use different basis orderings")
    mats = {
        name: extrapolate(StretchSeries(tuple(factors), tuple(s.matrices()[name] for s in systems)), order)
        for name in MATRIX_NAMES
    }
    mitigated = EomSystem(*(np.asarray(mats[n], dtype=complex) for n in MATRIX_NAMES), list(systems[0].labels))
    return mitigated, solve_secular(mitigated, metric_tol)


# -- bootstrap ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class Band:
    median: np.ndarray
    q1: np.ndarray
    q3: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.q3 - self.q1


def _quartiles(draws: np.ndarray) -> Band:
    return Band(*np.percentile(draws, [50, 25, 75], axis=0))


def bootstrap(
    samples: np.ndarray,
    statistic: Callable[[np.ndarray], np.ndarray] | None = None,
    resamples: int = 50,
    seed: int = 0,
) -> Band:
    """Median and quartiles of ``statistic`` over resamples of ``samples`` (axis 0) with replacement."""
    samples = np.asarray(samples)
    if samples.shape[0] == 0:
        raise ValueError("samples must be non-empty")
    statistic = statistic or (lambda s: np.mean(s, axis=0))
    rng = np.random.default_rng(seed)
    n = samples.shape[0]
    draws = [np.atleast_1d(statistic(samples[rng.integers(0, n, size=n)])) for _ in range(resamples)]
    return _quartiles(np.array(draws))


def resample_counts(sample: GroupSample, rng: np.random.Generator) -> GroupSample:
    """Redraw a group's shots with replacement from its empirical outcome distribution."""
    total = int(round(sample.shots))
    p = np.clip(sample.counts, 0, None)
    p = p / p.sum()
    return GroupSample(sample.labels, sample.basis, rng.multinomial(total, p).astype(float), sample.signs)


@dataclass
class MatrixRecord:
    """Shot records for every qEOM matrix element at one stretch factor."""

    size: int
    labels: list[str]
    elements: list[tuple[str, int, int, PauliSum, list[GroupSample]]]

    def system(self, rng: np.random.Generator | None = None) -> EomSystem:
        """Matrices from the record; with ``rng`` each group's counts are resampled first."""
        mats = {name: np.zeros((self.size, self.size), dtype=complex) for name in MATRIX_NAMES}
        for name, m, n, op, samples in self.elements:
            if not samples:
                continue
            if rng is not None:
                samples = [resample_counts(s, rng) for s in samples]
            mats[name][m, n] = combine_groups(op, samples)[0]
        return EomSystem(*(mats[n] for n in MATRIX_NAMES), list(self.labels))


def record_matrices(
    state: QuantumState,
    h: PauliSum,
    basis: Sequence[ExcitationOp],
    shots: int,
    seed: int,
    noise: NoiseModel | None = None,
) -> MatrixRecord:
    """Measure every element of M, Q, V, W with ``shots`` per group, keeping the counts."""
    ops = eom_operators(h, basis)
    elements = []
    for flat, (name, m, n, op) in enumerate(ops.items()):
        samples = []
        if op.terms:
            rng = np.random.default_rng(np.random.SeedSequence([seed, flat]))
            samples = sample_groups(state, op.labels, shots, rng, noise)
        elements.append((name, m, n, op, samples))
    return MatrixRecord(len(basis), [e.label for e in basis], elements)


def bootstrap_mitigated_gaps(
    records: Sequence[MatrixRecord],
    factors: Sequence[float],
    n_gaps: int,
    resamples: int = 50,
    seed: int = 0,
    metric_tol: float = 1e-7,
) -> tuple[Band, int]:
    """Bands of the lowest ``n_gaps`` mitigated excitation energies over count resamples.

    Each resample redraws every group of every element at every stretch
    factor, extrapolates the matrices and solves the secular equation.
    Returns the band and the number of resamples that failed to solve.
    """
    rng = np.random.default_rng(seed)
    draws = []
    failed = 0
    for _ in range(resamples):
        systems = [r.system(rng) for r in records]
        try:
            _, sol = mitigate_eom(systems, factors, metric_tol)
        except IllConditionedError:
            failed += 1
            continue
        e = np.full(n_gaps, np.nan)
        e[: min(n_gaps, sol.energies.size)] = sol.energies[:n_gaps]
        draws.append(e)
    if not draws:
        nan = np.full(n_gaps, np.nan)
        return Band(nan, nan, nan), failed
    return Band(*np.nanpercentile(np.array(draws), [50, 25, 75], axis=0)), failed
