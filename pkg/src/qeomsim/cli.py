"""Experiment drivers.

Every subcommand writes ``<out>/<name>.csv`` (plus auxiliary CSVs) and a
``<out>/<name>_manifest.json`` echoing the configuration, seeds and library
versions.  Output is byte-identical for identical arguments.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
The ``QEOMSIM_WORKERS`` environment variable sets the worker-process count
for embarrassingly parallel studies (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy

from qeomsim import __version__
from qeomsim.ansatz import AnsatzSpec, CompressedBlock, compress_block, reduced_lih_circuit, uccsd_circuit
from qeomsim.errors import (
    DegenerateFitError,
    FitError,
    IllConditionedError,
    NonHermitianError,
    ParseError,
    SingularCalibrationError,
    SingularityError,
)
from qeomsim.fermion import basis_from_reference
from qeomsim.hamlib import HamiltonianRecord, SectorSpec, hf_reference, resolve, sector_spectrum
from qeomsim.mitigation import (
    DEFAULT_STRETCH,
    StretchSeries,
    bootstrap_mitigated_gaps,
    extrapolate,
    mitigate_eom,
    record_matrices,
)
from qeomsim.qeom import Exact, Sampled, build_matrices, collapse_degenerate, solve_secular
from qeomsim.qse import perturbation_study
from qeomsim.simulator import NoiseModel, QuantumState, expectation, run, sample_expectation
from qeomsim.vqe import VqeConfig, minimize, quadratic_fit_optimum, sweep_to_csv, theta_sweep

NUMERICAL_ERRORS = (IllConditionedError, FitError, DegenerateFitError, SingularCalibrationError,
                    SingularityError, NonHermitianError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("grid must be non-empty")
    return vals


def _int_list(text: str) -> list[int]:
    vals = _float_list(text)
    if any(v != int(v) or v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return [int(v) for v in vals]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("QEOMSIM_WORKERS", "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence) -> list:
    """Ordered map, fanned out over worker processes when ``QEOMSIM_WORKERS > 1``."""
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


class Output:
    def __init__(self, args: argparse.Namespace, name: str):
        self.dir = Path(args.out)
        self.name = name
        self.args = args
        self.files: list[str] = []
        self.extra: dict = {}

    def write(self, suffix: str, text: str) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        fname = f"{self.name}{suffix}"
        (self.dir / fname).write_text(text)
        self.files.append(fname)

    def manifest(self) -> None:
        config = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("func", "out")}
        data = {
            "command": self.name,
            "config": config,
            "seed": getattr(self.args, "seed", None),
            "versions": {"qeomsim": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
            "outputs": self.files,
            **self.extra,
        }
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / f"{self.name}_manifest.json").write_text(json.dumps(data, indent=1, sort_keys=True, default=_fmt) + "\n")


# -- shared setup -------------------------------------------------------------------------------


def _record(args) -> HamiltonianRecord:
    return resolve(args.ham)


def _reference(rec: HamiltonianRecord) -> str:
    return hf_reference(rec)


def _circuit(rec: HamiltonianRecord, kind: str, block: str | None = None):
    ref = _reference(rec)
    if kind == "auto":
        kind = "reduced" if rec.name.startswith("lih_reduced") else "uccsd"
    if kind == "reduced":
        if rec.n_qubits != 4:
            raise UsageError("the reduced circuit is defined on 4 qubits")
        blk = CompressedBlock.load(block) if block else None
        return reduced_lih_circuit() if blk is None else reduced_lih_circuit(block=blk), kind
    spec = AnsatzSpec.from_basis(basis_from_reference(ref), ref)
    return uccsd_circuit(spec), kind


def _eom_basis(rec: HamiltonianRecord, choice: str):
    if choice == "auto":
        choice = rec.metadata.get("eom_basis", "spin")
    if choice not in ("spin", "particle"):
        raise UsageError(f"unknown basis {choice!r}")
    return basis_from_reference(_reference(rec), spin_conserving=(choice == "spin")), choice


def _sector(rec: HamiltonianRecord, basis_kind: str) -> SectorSpec:
    ref = _reference(rec)
    n_a = rec.n_qubits // 2
    n_el = ref.count("1")
    sz = 0.5 * (ref[:n_a].count("1") - ref[n_a:].count("1"))
    return SectorSpec(n_el, sz if basis_kind == "spin" else None)


def _ground_vqe(rec: HamiltonianRecord, circuit, optimizer: str):
    h = rec.hamiltonian
    x0 = np.zeros(len(circuit.parameters))
    res = minimize(h, circuit, x0, VqeConfig(method=optimizer))
    state = run(circuit, QuantumState.zero(rec.n_qubits), values=res.params)
    return res, state


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for stochastic modes")
    return args.seed


# -- subcommands --------------------------------------------------------------------------------


def cmd_vqe(args) -> int:
    rec = _record(args)
    circuit, kind = _circuit(rec, args.ansatz, args.block)
    out = Output(args, "vqe")
    h = rec.hamiltonian
    res, _ = _ground_vqe(rec, circuit, args.optimizer)
    exact = float(np.linalg.eigvalsh(h.to_dense())[0])
    rows = [
        ("ground_energy", res.energy, "hartree"),
        ("hf_energy", res.hf_energy, "hartree"),
        ("correlation_energy", res.corr, "hartree"),
        ("exact_ground_energy", exact, "hartree"),
        ("energy_shift", rec.shift, "hartree"),
        ("n_evaluations", res.n_evals, "count"),
        ("converged", int(res.converged), "flag"),
    ]
    rows += [(f"param_{name}", float(v), "radians") for name, v in zip(circuit.parameters, res.params)]
    if args.sweep:
        if len(circuit.parameters) != 1:
            raise UsageError("--sweep needs a one-parameter circuit")
        grid = np.linspace(args.theta_min, args.theta_max, args.theta_points)
        noise = None
        if args.mode != "ideal":
            noise = NoiseModel.from_device(args.stretch, readout=args.readout)
        seed = _require_seed(args) if args.mode == "sampled" else args.seed
        pts = theta_sweep(h, circuit, grid, args.mode, seed, args.shots, noise)
        out.write("_sweep.csv", sweep_to_csv(pts))
        t, e, resid = quadratic_fit_optimum(pts)
        rows += [("fit_theta", t, "radians"), ("fit_energy", e, "hartree"),
                 ("fit_correlation_energy", e - res.hf_energy, "hartree"), ("fit_rms_residual", resid, "hartree")]
    out.write(".csv", _csv(["quantity", "value", "unit"], rows))
    out.extra = {"ansatz": kind, "hamiltonian": rec.name}
    out.manifest()
    print(f"E0 = {res.energy:.8f} Ha   E_corr = {res.corr:.6f} Ha")
    return 0


def _noisy_states(circuit, values, factors, readout, n_qubits, scaling="linear"):
    return [
        run(circuit, QuantumState.zero(n_qubits, "density"), NoiseModel.from_device(c, scaling, readout), values=values)
        for c in factors
    ]


def cmd_qeom(args) -> int:
    rec = _record(args)
    h = rec.hamiltonian
    basis, basis_kind = _eom_basis(rec, args.basis)
    sector = _sector(rec, basis_kind)
    levels, vecs = sector_spectrum(h, sector)
    exact_gaps = levels[1:] - levels[0]
    out = Output(args, "qeom")
    if args.state == "exact":
        state, e0, params = QuantumState(vecs[:, 0]), float(levels[0]), []
    else:
        circuit, _ = _circuit(rec, args.ansatz, args.block)
        res, state = _ground_vqe(rec, circuit, args.optimizer)
        e0, params = res.energy, list(res.params)
    if args.estimator == "sampled":
        estimator = Sampled(args.shots, _require_seed(args))
    else:
        estimator = Exact()
    if args.mitigate:
        if args.state == "exact":
            raise UsageError("--mitigate needs the circuit-prepared state (--state vqe)")
        circuit, _ = _circuit(rec, args.ansatz, args.block)
        readout = args.readout if args.estimator == "sampled" else 0.0
        states = _noisy_states(circuit, params, args.stretch, readout, rec.n_qubits)
        if args.estimator == "sampled":
            systems = [build_matrices(s, h, basis, Sampled(args.shots, args.seed + k,
                                                           NoiseModel(readout=readout)))
                       for k, s in enumerate(states)]
        else:
            systems = [build_matrices(s, h, basis) for s in states]
        energies = [expectation(s, h) for s in states]
        e0 = float(extrapolate(StretchSeries(tuple(args.stretch), tuple(energies))))
        system, sol = mitigate_eom(systems, args.stretch, args.metric_tol)
    else:
        system = build_matrices(state, h, basis, estimator)
        sol = solve_secular(system, args.metric_tol)
    rows = []
    for k, gap in enumerate(sol.energies):
        ex = exact_gaps[k] if k < exact_gaps.size else float("nan")
        rows.append((k + 1, gap, e0 + gap, ex, abs(gap - ex)))
    out.write(".csv", _csv(["transition", "gap_hartree", "energy_hartree", "exact_gap_hartree",
                            "abs_error_hartree"], rows))
    amp_rows = []
    for k, (_, x, y) in enumerate(sol):
        for label, xv, yv in zip(system.labels, x, y):
            amp_rows.append((k + 1, label, xv.real, xv.imag, yv.real, yv.imag))
    out.write("_amplitudes.csv", _csv(["transition", "operator", "x_re_dimensionless", "x_im_dimensionless",
                                       "y_re_dimensionless", "y_im_dimensionless"], amp_rows))
    out.extra = {
        "hamiltonian": rec.name,
        "basis": [e.label for e in basis],
        "ground_energy_hartree": e0,
        "levels": [{"gap_hartree": g, "multiplicity": m} for g, m in collapse_degenerate(sol.energies, 1e-6)],
        "diagnostics": sol.diagnostics(),
    }
    out.manifest()
    for k, gap in enumerate(sol.energies):
        print(f"transition {k + 1}: {gap:.6f} Ha")
    return 0


def cmd_error_propagation(args) -> int:
    rec = _record(args)
    h = rec.hamiltonian
    ref = _reference(rec)
    basis = basis_from_reference(ref)
    circuit = uccsd_circuit(AnsatzSpec.from_basis(basis, ref))
    res = minimize(h, circuit, np.zeros(len(basis)), VqeConfig(method="lbfgsb", tol=1e-14))

    def levels(x):
        st = run(circuit, QuantumState.zero(rec.n_qubits), values=x)
        e0 = expectation(st, h)
        gaps = solve_secular(build_matrices(st, h, basis), args.metric_tol).energies
        return e0, gaps

    e0_ref, gaps_ref = levels(res.params)
    rows = []
    for eps in args.eps:
        e0, gaps = levels(res.params + eps)
        d0 = abs(e0 - e0_ref)
        dgap = np.abs(gaps - gaps_ref)
        dabs = np.abs((e0 + gaps) - (e0_ref + gaps_ref))
        rows.append((eps, 0, d0, 0.0, float("nan")))
        for k in range(gaps.size):
            ratio = dgap[k] / d0 if d0 > 0 else float("nan")
            rows.append((eps, k + 1, dabs[k], dgap[k], ratio))
    out = Output(args, "error_propagation")
    out.write(".csv", _csv(["eps_radians", "state", "abs_energy_error_hartree", "gap_error_hartree",
                            "gap_to_ground_error_ratio_dimensionless"], rows))
    out.extra = {"hamiltonian": rec.name, "reference_params_radians": [float(v) for v in res.params]}
    out.manifest()
    return 0


def _shot_noise_task(task):
    h, basis, state_vec, shots, seed = task
    state = QuantumState(state_vec)
    e0, _ = sample_expectation(state, h, shots, np.random.SeedSequence([seed, 0]))
    system = build_matrices(state, h, basis, Sampled(shots, seed))
    try:
        gaps = solve_secular(system).energies
    except IllConditionedError:
        gaps = np.full(len(basis), np.nan)
    return e0, gaps, system


def cmd_shot_noise(args) -> int:
    seed = _require_seed(args)
    rec = _record(args)
    h = rec.hamiltonian
    basis, basis_kind = _eom_basis(rec, "auto")
    levels, vecs = sector_spectrum(h, _sector(rec, basis_kind))
    state = QuantumState(vecs[:, 0])
    exact_sys = build_matrices(state, h, basis)
    exact_gaps = solve_secular(exact_sys).energies
    e0_ref = float(levels[0])
    ss = np.random.SeedSequence(seed)
    rows = []
    for shots, child in zip(args.shots, ss.spawn(len(args.shots))):
        seeds = [int(s.generate_state(1)[0]) for s in child.spawn(args.repeats)]
        results = _pmap(_shot_noise_task, [(h, basis, state.data, shots, s) for s in seeds])
        e0s = np.array([r[0] for r in results])
        gaps = np.array([r[1][: exact_gaps.size] for r in results])
        rows.append((shots, "ground_energy", np.mean(np.abs(e0s - e0_ref)), np.std(np.abs(e0s - e0_ref)), "hartree"))
        gerr = np.abs(gaps - exact_gaps)
        for k in range(exact_gaps.size):
            rows.append((shots, f"gap_{k + 1}", np.nanmean(gerr[:, k]), np.nanstd(gerr[:, k]), "hartree"))
            eabs = np.abs(e0s + gaps[:, k] - (e0_ref + exact_gaps[k]))
            rows.append((shots, f"energy_{k + 1}", np.nanmean(eabs), np.nanstd(eabs), "hartree"))
        rows.append((shots, "gap_mean", np.nanmean(gerr), np.nanstd(np.nanmean(gerr, axis=1)), "hartree"))
        for name in ("M", "V", "Q", "W"):
            norms = [np.linalg.norm(r[2].matrices()[name] - exact_sys.matrices()[name]) for r in results]
            unit = "hartree" if name in ("M", "Q") else "dimensionless"
            rows.append((shots, f"norm_error_{name}", np.mean(norms), np.std(norms), unit))
    out = Output(args, "shot_noise")
    out.write(".csv", _csv(["shots", "quantity", "mean_abs_error", "std_abs_error", "unit"], rows))
    out.extra = {"hamiltonian": rec.name}
    out.manifest()
    return 0


def _qse_task(task):
    h, basis, state_vec, levels, alpha, trials, seed, sigma = task
    rows, _ = perturbation_study(h, QuantumState(state_vec), basis, levels, [alpha], trials, seed, sigma)
    return rows


def cmd_qse_compare(args) -> int:
    seed = _require_seed(args)
    rec = _record(args)
    h = rec.hamiltonian
    basis, basis_kind = _eom_basis(rec, "auto")
    levels, vecs = sector_spectrum(h, _sector(rec, basis_kind))
    n_levels = len(basis) + 1
    tasks = [(h, basis, vecs[:, 0], levels[:n_levels], a, args.trials, seed + 1000 * k, args.sigma)
             for k, a in enumerate(args.alphas)]
    rows = [r for chunk in _pmap(_qse_task, tasks) for r in chunk]
    out = Output(args, "qse_compare")
    out.write(".csv", _csv(["alpha_dimensionless", "method", "mean_abs_error_hartree", "std_abs_error_hartree",
                            "n_ok", "n_failed"],
                           [(r.alpha, r.method, r.mean_error, r.std_error, r.n_ok, r.n_failed) for r in rows]))
    out.extra = {"hamiltonian": rec.name, "sigma": args.sigma}
    out.manifest()
    return 0


def cmd_mitigated_run(args) -> int:
    seed = _require_seed(args)
    rec = _record(args)
    h = rec.hamiltonian
    circuit, _ = _circuit(rec, args.ansatz, args.block)
    if len(circuit.parameters) != 1:
        raise UsageError("mitigated-run needs a one-parameter circuit")
    basis, _ = _eom_basis(rec, args.basis)
    factors = tuple(args.stretch)
    noiseless = args.noise == "none"
    readout = 0.0 if noiseless else args.readout

    def model(c):
        if noiseless:
            return NoiseModel(readout=0.0, stretch=c)
        return NoiseModel.from_device(c, args.scaling, readout)

    # ideal reference
    res, ideal_state = _ground_vqe(rec, circuit, "cobyla")
    ideal_gaps = solve_secular(build_matrices(ideal_state, h, basis), args.metric_tol).energies

    grid = np.linspace(args.theta_min, args.theta_max, args.theta_points)
    sweep_mode = "noisy" if args.shots == 0 else "sampled"
    seeds = np.random.SeedSequence(seed).spawn(2 * len(factors))
    sweeps = []
    for k, c in enumerate(factors):
        seed_k = int(seeds[k].generate_state(1)[0])
        if noiseless and sweep_mode == "noisy":
            sweeps.append(theta_sweep(h, circuit, grid, "ideal"))
        else:
            sweeps.append(theta_sweep(h, circuit, grid, sweep_mode, seed_k, max(args.shots, 1), model(c)))
    sweep_rows = [(p.theta, c, p.energy, p.stderr) for c, pts in zip(factors, sweeps) for p in pts]
    mitigated_sweep = [
        (t, float(extrapolate(StretchSeries(factors, tuple(s[i].energy for s in sweeps)))))
        for i, t in enumerate(grid)
    ]
    sweep_rows += [(t, 0.0, e, float("nan")) for t, e in mitigated_sweep]
    theta_star, e_star, resid = quadratic_fit_optimum(mitigated_sweep)
    fits = [quadratic_fit_optimum(pts) for pts in sweeps]

    states = [run(circuit, QuantumState.zero(rec.n_qubits, "density"), None if noiseless else model(c),
                  values=[theta_star]) for c in factors]
    if args.shots == 0:
        systems = [build_matrices(s, h, basis) for s in states]
        records = None
    else:
        records = [record_matrices(s, h, basis, args.shots, int(seeds[len(factors) + k].generate_state(1)[0]),
                                   NoiseModel(readout=readout))
                   for k, s in enumerate(states)]
        systems = [r.system() for r in records]
    per_c = [solve_secular(s, args.metric_tol).energies for s in systems]
    _, sol = mitigate_eom(systems, factors, args.metric_tol)

    rows = []
    for c, (t, e, _), g in zip(factors, fits, per_c):
        rows.append(("ground", c, e, res.energy, abs(e - res.energy)))
        for k, gap in enumerate(g):
            ref = ideal_gaps[k] if k < ideal_gaps.size else float("nan")
            rows.append((f"gap_{k + 1}", c, gap, ref, abs(gap - ref)))
    rows.append(("ground", 0.0, e_star, res.energy, abs(e_star - res.energy)))
    for k, gap in enumerate(sol.energies):
        ref = ideal_gaps[k] if k < ideal_gaps.size else float("nan")
        rows.append((f"gap_{k + 1}", 0.0, gap, ref, abs(gap - ref)))

    out = Output(args, "mitigated_run")
    out.write(".csv", _csv(["quantity", "stretch_dimensionless", "value_hartree", "ideal_hartree",
                            "abs_error_hartree"], rows))
    out.write("_sweep.csv", _csv(["theta_radians", "stretch_dimensionless", "energy_hartree", "stderr_hartree"],
                                 sweep_rows))
    if records is not None:
        band, failed = bootstrap_mitigated_gaps(records, factors, ideal_gaps.size, args.resamples, seed,
                                                args.metric_tol)
        out.write("_bands.csv", _csv(["quantity", "median_hartree", "q1_hartree", "q3_hartree"],
                                     [(f"gap_{k + 1}", band.median[k], band.q1[k], band.q3[k])
                                      for k in range(ideal_gaps.size)]))
        out.extra["bootstrap_failed"] = failed
    out.extra.update({"hamiltonian": rec.name, "theta_star_radians": theta_star, "fit_rms_residual_hartree": resid,
                      "basis": [e.label for e in basis]})
    out.manifest()
    return 0


def cmd_compress(args) -> int:
    seed = _require_seed(args)
    rec = _record(args)
    result = compress_block(reference=_reference(rec), seed=seed, n_starts=args.starts)
    out = Output(args, "compress")
    out.write("_block.json", json.dumps(result.block.to_json(), indent=1) + "\n")
    circuit = reduced_lih_circuit(block=result.block)
    res = minimize(rec.hamiltonian, circuit, [0.0])
    rows = [(f"phi_{q}_{k}", v, "radians") for q, phi in enumerate(result.block.phis) for k, v in enumerate(phi)]
    rows += [("worst_fidelity", result.worst_fidelity, "dimensionless"),
             ("mean_fidelity", result.mean_fidelity, "dimensionless"),
             ("converged", int(result.converged), "flag"),
             ("correlation_energy", res.corr, "hartree")]
    out.write(".csv", _csv(["quantity", "value", "unit"], rows))
    out.extra = {"hamiltonian": rec.name}
    out.manifest()
    return 0


# -- argument parsing ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qeomsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, ham="h2_0.75", seed_required=False):
        sp.add_argument("--ham", default=ham, help="embedded name (h2_0.75, lih_reduced_1.6) or JSON path")
        sp.add_argument("--seed", type=int, default=None if seed_required else 0)
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("--metric-tol", type=float, default=1e-7)

    def circuit_opts(sp):
        sp.add_argument("--ansatz", choices=("auto", "uccsd", "reduced"), default="auto")
        sp.add_argument("--block", default=None, help="compressed-block JSON replacing the published angles")
        sp.add_argument("--optimizer", choices=("cobyla", "nelder-mead", "lbfgsb"), default="cobyla")

    sp = sub.add_parser("vqe", help="ground state by VQE, optionally with a theta sweep and quadratic fit")
    common(sp)
    circuit_opts(sp)
    sp.add_argument("--sweep", action="store_true")
    sp.add_argument("--mode", choices=("ideal", "noisy", "sampled"), default="ideal")
    sp.add_argument("--shots", type=int, default=8192)
    sp.add_argument("--stretch", type=float, default=1.0)
    sp.add_argument("--readout", type=float, default=0.05)
    sp.add_argument("--theta-min", type=float, default=-0.5)
    sp.add_argument("--theta-max", type=float, default=0.0)
    sp.add_argument("--theta-points", type=int, default=11)
    sp.set_defaults(func=cmd_vqe)

    sp = sub.add_parser("qeom", help="excitation energies from the qEOM secular equation")
    common(sp)
    circuit_opts(sp)
    sp.add_argument("--basis", choices=("auto", "spin", "particle"), default="auto",
                    help="spin- or only particle-conserving excitations")
    sp.add_argument("--state", choices=("vqe", "exact"), default="vqe")
    sp.add_argument("--estimator", choices=("exact", "sampled"), default="exact")
    sp.add_argument("--shots", type=int, default=8192)
    sp.add_argument("--mitigate", action="store_true", help="noisy runs at each stretch factor, extrapolated")
    sp.add_argument("--stretch", type=_float_list, default=list(DEFAULT_STRETCH))
    sp.add_argument("--readout", type=float, default=0.05)
    sp.set_defaults(func=cmd_qeom)

    sp = sub.add_parser("error-propagation", help="parameter-perturbation study")
    common(sp)
    sp.add_argument("--eps", type=_float_list, default=[1e-4, 1e-3, 1e-2, 1e-1])
    sp.set_defaults(func=cmd_error_propagation)

    sp = sub.add_parser("shot-noise", help="finite-shot study of energies and matrix norms")
    common(sp, seed_required=True)
    sp.add_argument("--shots", type=_int_list, default=[8192, 4096, 2048, 1024])
    sp.add_argument("--repeats", type=int, default=100)
    sp.set_defaults(func=cmd_shot_noise)

    sp = sub.add_parser("qse-compare", help="random-unitary robustness of qEOM versus QSE")
    common(sp, seed_required=True)
    sp.add_argument("--alphas", type=_float_list, default=[0.0, 0.1, 0.25, 0.5, 0.75, 1.0])
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--sigma", type=float, default=0.05)
    sp.set_defaults(func=cmd_qse_compare)

    sp = sub.add_parser("mitigated-run", help="noisy sweeps, zero-noise extrapolation and mitigated qEOM")
    common(sp, ham="lih_reduced_1.6", seed_required=True)
    circuit_opts(sp)
    sp.add_argument("--basis", choices=("auto", "spin", "particle"), default="auto")
    sp.add_argument("--stretch", type=_float_list, default=list(DEFAULT_STRETCH))
    sp.add_argument("--noise", choices=("device", "none"), default="device")
    sp.add_argument("--scaling", choices=("linear", "table"), default="linear")
    sp.add_argument("--readout", type=float, default=0.05)
    sp.add_argument("--shots", type=int, default=8192, help="0 selects exact expectations")
    sp.add_argument("--resamples", type=int, default=50)
    sp.add_argument("--theta-min", type=float, default=-0.5)
    sp.add_argument("--theta-max", type=float, default=0.0)
    sp.add_argument("--theta-points", type=int, default=11)
    sp.set_defaults(func=cmd_mitigated_run)

    sp = sub.add_parser("compress", help="fit single-block rotation angles to a UCC double excitation")
    common(sp, ham="lih_reduced_1.6", seed_required=True)
    sp.add_argument("--starts", type=int, default=8)
    sp.set_defaults(func=cmd_compress)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FileNotFoundError, KeyError, ParseError) as exc:
        print(f"qeomsim: error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"qeomsim: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
