"""Variational ground-state search, parameter sweeps and quadratic-fit optimum."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from qeomsim.errors import FitError, NonHermitianError
from qeomsim.pauli import PauliSum
from qeomsim.simulator import Circuit, NoiseModel, QuantumState, expectation, run, sample_expectation

CircuitFamily = Callable[[Sequence[float]], QuantumState] | Circuit


@dataclass
class VqeConfig:
    """Optimizer settings.

    ``method`` is ``"cobyla"`` (default, derivative-free), ``"nelder-mead"``
    or ``"lbfgsb"`` (central finite differences with step ``fd_step``).
    """

    method: str = "cobyla"
    tol: float = 1e-9
    maxiter: int = 500
    fd_step: float = 1e-4
    rhobeg: float = 0.1

    def __post_init__(self):
        if self.method not in ("cobyla", "nelder-mead", "lbfgsb"):
            raise ValueError(f"unknown optimizer {self.method!r}")


@dataclass
class VqeResult:
    params: np.ndarray
    energy: float
    hf_energy: float
    trace: list[tuple[tuple[float, ...], float]] = field(repr=False, default_factory=list)
    converged: bool = True
    n_evals: int = 0

    @property
    def corr(self) -> float:
        return self.energy - self.hf_energy

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate([e for _, e in self.trace]) if self.trace else np.zeros(0)


def state_preparer(circuit: Circuit, initial: QuantumState | None = None, noise: NoiseModel | None = None):
    """Map parameter vectors to prepared states."""
    names = circuit.parameters
    if initial is None:
        initial = QuantumState.zero(circuit.n_qubits, "density" if noise is not None else "statevector")

    def prepare(x: Sequence[float]) -> QuantumState:
        return run(circuit, initial, noise, dict(zip(names, np.atleast_1d(x))))

    prepare.n_params = len(names)
    return prepare


def _as_preparer(family: CircuitFamily, noise: NoiseModel | None = None):
    return state_preparer(family, noise=noise) if isinstance(family, Circuit) else family


def minimize(
    h: PauliSum,
    ansatz: CircuitFamily,
    x0: Sequence[float],
    config: VqeConfig | None = None,
    hf_energy: float | None = None,
) -> VqeResult:
    """Minimize ``<psi(x)|h|psi(x)>``.

    ``hf_energy`` defaults to the energy at ``x = 0`` when the ansatz is a
    circuit (the reference determinant for UCC-type circuits).
    """
    config = config or VqeConfig()
    if not h.is_hermitian():
        raise NonHermitianError("the Hamiltonian must be Hermitian")
    prepare = _as_preparer(ansatz)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n_params = getattr(prepare, "n_params", x0.size)
    if n_params != x0.size:
        raise ValueError(f"ansatz has {n_params} parameters, x0 has {x0.size}")

    trace: list[tuple[tuple[float, ...], float]] = []

    def energy(x):
        e = expectation(prepare(x), h)
        trace.append((tuple(float(v) for v in x), e))
        return e

    if hf_energy is None:
        hf_energy = expectation(prepare(np.zeros_like(x0)), h)
    if x0.size == 0:
        e = energy(x0)
        return VqeResult(x0, e, hf_energy, trace, True, 1)

    if config.method == "cobyla":
        res = _scipy_minimize(energy, x0, method="COBYLA",
                              options={"maxiter": config.maxiter, "tol": config.tol, "rhobeg": config.rhobeg})
    elif config.method == "nelder-mead":
        res = _scipy_minimize(energy, x0, method="Nelder-Mead",
                              options={"maxiter": config.maxiter, "fatol": config.tol, "xatol": 1e-8})
    else:
        step = config.fd_step

        def grad(x):
            g = np.zeros_like(x)
            for k in range(x.size):
                d = np.zeros_like(x)
                d[k] = step
                g[k] = (energy(x + d) - energy(x - d)) / (2 * step)
            return g

        res = _scipy_minimize(energy, x0, jac=grad, method="L-BFGS-B",
                              options={"maxiter": config.maxiter, "ftol": config.tol, "gtol": 1e-8})

    # report the best point ever evaluated (the optimizer's last point may be worse)
    k_best = int(np.argmin([e for _, e in trace]))
    x_best, e_best = np.array(trace[k_best][0]), trace[k_best][1]
    converged = bool(res.success)
    return VqeResult(x_best, e_best, hf_energy, trace, converged, len(trace))


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    energy: float
    stderr: float
    mode: str
    stretch: float


def theta_sweep(
    h: PauliSum,
    family: CircuitFamily,
    thetas: Sequence[float],
    mode: str = "ideal",
    seed: int | None = None,
    shots: int = 8192,
    noise: NoiseModel | None = None,
) -> list[SweepPoint]:
    """Energy along a one-parameter grid.

    ``mode``: ``"ideal"`` exact statevector energies; ``"noisy"`` exact
    density-matrix energies under ``noise``; ``"sampled"`` finite-shot
    estimates (on the noisy state when ``noise`` is given, including its
    readout error).  Per-point seeds are spawned from ``seed``.
    """
    thetas = list(thetas)
    if not thetas:
        raise ValueError("theta grid must be non-empty")
    if mode not in ("ideal", "noisy", "sampled"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    if mode == "sampled" and seed is None:
        raise ValueError("sampled sweeps need a seed")
    if mode == "noisy" and noise is None:
        raise ValueError("noisy sweeps need a noise model")
    prepare = _as_preparer(family, noise if mode != "ideal" else None)
    stretch = noise.stretch if noise is not None and mode != "ideal" else 0.0
    seeds = np.random.SeedSequence(seed).spawn(len(thetas)) if seed is not None else [None] * len(thetas)
    out = []
    for t, ss in zip(thetas, seeds):
        state = prepare([t])
        if mode == "sampled":
            e, err = sample_expectation(state, h, shots, np.random.default_rng(ss), noise)
        else:
            e, err = expectation(state, h), 0.0
        out.append(SweepPoint(float(t), e, err, mode, stretch))
    return out


def quadratic_fit_optimum(points: Sequence[SweepPoint] | Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Vertex ``(theta*, E(theta*), rms residual)`` of a least-squares parabola."""
    pts = [(p.theta, p.energy) if isinstance(p, SweepPoint) else (float(p[0]), float(p[1])) for p in points]
    if len(pts) < 3:
        raise FitError(f"quadratic fit needs at least 3 points, got {len(pts)}")
    x, y = np.array(pts).T
    if np.unique(x).size < 3:
        raise FitError("quadratic fit needs at least 3 distinct abscissae")
    a, b, c = np.polyfit(x, y, 2)
    if a <= 0:
        raise FitError("fitted parabola is not convex; minimum not bracketed")
    t = -b / (2 * a)
    resid = y - np.polyval([a, b, c], x)
    return float(t), float(np.polyval([a, b, c], t)), float(np.sqrt(np.mean(resid**2)))


SWEEP_HEADER = ["theta_radians", "energy_hartree", "stderr_hartree", "mode", "stretch_dimensionless"]


def sweep_to_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for p in points:
        w.writerow([f"{p.theta:.12g}", f"{p.energy:.12g}", f"{p.stderr:.6g}", p.mode, f"{p.stretch:g}"])
    return buf.getvalue()
