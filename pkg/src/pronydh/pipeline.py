"""End-to-end decimated-homotopy solve and the experiment harness.

The solve path: pick the largest safe stride, build the square
Hankel-structured system from the strided measurements, solve it by
homotopy continuation, prune aliases and spurious solutions, and recover
the amplitudes from the full measurement set.  The experiment harness
generates clustered random instances, runs the selected methods over a
stride sweep with seeded noise, and writes delimited results, a JSON
report, plot-ready curves and rendered figures.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classical import confluent_vandermonde_solve, prony_solve
from .conditioning import (
    condition_numbers_decimated,
    condition_numbers_full,
    system_sensitivity,
)
from .errors import SolveFailure
from .esprit import EspritOptions, esprit_estimate
from .hankelize import build_hankel_system
from .model import (
    MeasurementSequence,
    MultiplicityVector,
    NoiseSpec,
    PronyParameters,
    add_noise,
    choose_decimation,
    decimate,
    forward_map,
    separation,
)
from .polysolve import TrackOptions, solve_system
from .pruning import (
    filter_by_init,
    recurrence_residual,
    select_exhaustive,
    select_prefilter,
)

__all__ = [
    "SolveOptions",
    "ExperimentConfig",
    "ExperimentReport",
    "decimated_homotopy",
    "random_cluster_instance",
    "node_error",
    "run_experiment",
    "emit_report",
    "report_from_json",
]

STRATEGIES = ("exhaustive", "prefilter", "prefilter+init")

CSV_COLUMNS = [
    "trial",
    "method",
    "seed",
    "N",
    "delta",
    "p",
    "node_err",
    "cn_full",
    "cn_dec",
    "kappa",
    "t_construct_ms",
    "t_solve_ms",
    "t_select_ms",
    "n_solutions",
    "status",
]


@dataclass(frozen=True)
class SolveOptions:
    """Pruning strategy and tracking controls for one decimated solve."""

    strategy: str = "prefilter"
    z_init: np.ndarray | None = None
    eta: float | None = None  # defaults to 1/N at solve time
    residual_k_max: int | None = None
    track: TrackOptions = field(default_factory=TrackOptions)
    p_override: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.strategy == "prefilter+init" and self.z_init is None:
            raise ValueError("strategy 'prefilter+init' requires z_init")


def decimated_homotopy(
    meas: MeasurementSequence,
    D: MultiplicityVector,
    opts: SolveOptions = SolveOptions(),
) -> tuple[PronyParameters, dict]:
    """Recover a parameter point from raw measurements via decimated homotopy.

    Returns the estimate together with a diagnostics dict (stride, path
    statistics, candidate counts, selection residual, stage timings in ms).
    """
    N = len(meas)
    R = D.num_parameters
    p = opts.p_override if opts.p_override is not None else choose_decimation(N, R)
    if p < 1 or p * (R - 1) > N - 1:
        raise ValueError("stride does not fit the measurement count")

    t0 = time.perf_counter()
    dec = decimate(meas, p, R)
    system = build_hankel_system(dec, D)
    t1 = time.perf_counter()
    solutions = solve_system(system.square_system, opts.track)
    t2 = time.perf_counter()

    eta = opts.eta if opts.eta is not None else 1.0 / N
    n_candidates = None
    if opts.strategy == "exhaustive":
        nodes = select_exhaustive(solutions, p, meas, D, opts.residual_k_max)
    else:
        _, candidates = select_prefilter(solutions, p)
        if opts.strategy == "prefilter+init":
            candidates = filter_by_init(candidates, opts.z_init, eta)
        n_candidates = len(candidates)
        best, best_res = None, np.inf
        for z in sorted(
            candidates.candidates, key=lambda z: tuple((c.real, c.imag) for c in z)
        ):
            res = recurrence_residual(z, meas, D, opts.residual_k_max)
            if res < best_res:
                best, best_res = z, res
        nodes = best
    selected_residual = recurrence_residual(nodes, meas, D, opts.residual_k_max)
    coeffs = confluent_vandermonde_solve(nodes, D, meas)
    t3 = time.perf_counter()

    params = PronyParameters(nodes, coeffs, D)
    diagnostics = {
        "p": p,
        "strategy": opts.strategy,
        "eta": eta,
        "n_paths": solutions.n_paths,
        "n_converged": solutions.n_converged,
        "n_diverged": solutions.n_diverged,
        "n_failed": solutions.n_failed,
        "n_solutions": len(solutions),
        "n_candidates": n_candidates,
        "selected_residual": selected_residual,
        "t_construct_ms": 1e3 * (t1 - t0),
        "t_solve_ms": 1e3 * (t2 - t1),
        "t_select_ms": 1e3 * (t3 - t2),
    }
    return params, diagnostics


def random_cluster_instance(
    D: MultiplicityVector, delta: float, rng: np.random.Generator
) -> PronyParameters:
    """One clustered instance: evenly spaced node fan of width delta per gap.

    The cluster center is uniform on the circle; adjacent nodes sit delta
    apart in angle.  Amplitudes have uniform argument and magnitude in
    [0.5, 1.5], so leading coefficients stay away from zero.
    """
    s = D.num_nodes
    center = rng.uniform(0.0, 2.0 * np.pi)
    offsets = (np.arange(s) - (s - 1) / 2.0) * delta
    nodes = np.exp(1j * (center + offsets))
    coeffs = []
    for dj in D.parts:
        mag = rng.uniform(0.5, 1.5, size=dj)
        arg = rng.uniform(0.0, 2.0 * np.pi, size=dj)
        coeffs.append(mag * np.exp(1j * arg))
    return PronyParameters(nodes, tuple(coeffs), D)


def node_error(estimated, true) -> float:
    """Max node deviation after the best label matching (s <= 6 exhaustively)."""
    est = np.asarray(estimated, dtype=complex).reshape(-1)
    ref = np.asarray(true, dtype=complex).reshape(-1)
    if est.shape != ref.shape:
        raise ValueError("node vectors differ in length")
    s = len(ref)
    if s > 6:
        raise ValueError("node matching supported up to 6 nodes")
    best = None
    for perm in itertools.permutations(range(s)):
        errs = np.abs(est[list(perm)] - ref)
        key = (float(errs.max()), float(errs.sum()))
        if best is None or key < best:
            best = key
    return best[0]


@dataclass(frozen=True)
class ExperimentConfig:
    """Seeded experiment design: instances, noise, stride sweep and methods."""

    multiplicities: MultiplicityVector
    N: int
    delta_range: tuple[float, float]
    trials: int = 1
    p_values: tuple[int, ...] | None = None  # default: the automatic stride only
    noise_kind: str = "bounded-uniform-complex"
    noise_level: float = 0.0
    methods: tuple[str, ...] = ("DH",)
    strategy: str = "prefilter+init"
    eta: float | None = None
    seed: int = 0

    _METHODS = ("DH", "ESPRIT", "Prony")

    def __post_init__(self):
        methods = tuple(_canonical_method(m) for m in self.methods)
        object.__setattr__(self, "methods", methods)
        if self.trials < 1:
            raise ValueError("trial count must be at least 1")
        lo, hi = self.delta_range
        if not (0 < lo <= hi):
            raise ValueError("delta range must satisfy 0 < lo <= hi")
        R = self.multiplicities.num_parameters
        if self.N < R:
            raise ValueError("N must be at least the parameter count")
        p_max = self.N // R
        if self.p_values is not None:
            ps = tuple(int(p) for p in self.p_values)
            if any(p < 1 or p > p_max for p in ps):
                raise ValueError(f"stride values must lie in [1, {p_max}]")
            object.__setattr__(self, "p_values", ps)
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def resolved_p_values(self) -> tuple[int, ...]:
        if self.p_values is not None:
            return self.p_values
        return (choose_decimation(self.N, self.multiplicities.num_parameters),)

    def to_dict(self) -> dict:
        return {
            "multiplicities": list(self.multiplicities.parts),
            "N": self.N,
            "delta_range": list(self.delta_range),
            "trials": self.trials,
            "p_values": list(self.resolved_p_values()),
            "noise_kind": self.noise_kind,
            "noise_level": self.noise_level,
            "methods": list(self.methods),
            "strategy": self.strategy,
            "eta": self.eta,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {
            "multiplicities",
            "N",
            "delta_range",
            "trials",
            "p_values",
            "noise_kind",
            "noise_level",
            "methods",
            "strategy",
            "eta",
            "seed",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        if "multiplicities" not in data or "N" not in data:
            raise ValueError("experiment config requires 'multiplicities' and 'N'")
        delta_range = data.get("delta_range", [0.01, 0.1])
        return cls(
            multiplicities=MultiplicityVector(tuple(data["multiplicities"])),
            N=int(data["N"]),
            delta_range=(float(delta_range[0]), float(delta_range[1])),
            trials=int(data.get("trials", 1)),
            p_values=tuple(data["p_values"]) if data.get("p_values") else None,
            noise_kind=data.get("noise_kind", "bounded-uniform-complex"),
            noise_level=float(data.get("noise_level", 0.0)),
            methods=tuple(data.get("methods", ["DH"])),
            strategy=data.get("strategy", "prefilter+init"),
            eta=data.get("eta"),
            seed=int(data.get("seed", 0)),
        )


def _canonical_method(name: str) -> str:
    table = {"dh": "DH", "esprit": "ESPRIT", "prony": "Prony", "classical-prony": "Prony"}
    key = name.strip().lower()
    if key not in table:
        raise ValueError(f"unknown method {name!r}; expected DH, ESPRIT or Prony")
    return table[key]


@dataclass(frozen=True)
class ExperimentReport:
    """Config echo plus one record per (trial, method, stride)."""

    config: dict
    rows: tuple[dict, ...]


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every (trial, method, stride) cell of the configured experiment.

    Individual cell failures are recorded in their row (status column) and
    do not abort the sweep.  Identical configs produce identical reports up
    to the wall-clock timing columns.
    """
    rows: list[dict] = []
    p_values = config.resolved_p_values()
    seeds = np.random.SeedSequence(config.seed).spawn(config.trials)
    for trial in range(config.trials):
        rng = np.random.default_rng(seeds[trial])
        trial_seed = int(seeds[trial].generate_state(1)[0])
        delta = rng.uniform(*config.delta_range)
        truth = random_cluster_instance(config.multiplicities, delta, rng)
        clean = forward_map(truth, config.N)
        noisy = add_noise(
            clean,
            NoiseSpec(kind=config.noise_kind, level=config.noise_level, seed=trial_seed),
        )
        try:
            cn_full = condition_numbers_full(truth, config.N)
            cn_full_z = _max_node_value(cn_full.cn_full, truth)
        except SolveFailure:
            cn_full_z = float("nan")

        cached: dict[str, dict] = {}
        for p in p_values:
            try:
                cn_dec = condition_numbers_decimated(truth, p)
                cn_dec_z = _max_node_value(cn_dec.cn_decimated, truth)
            except SolveFailure:
                cn_dec_z = float("nan")
            for method in config.methods:
                row = {
                    "trial": trial,
                    "method": method,
                    "seed": trial_seed,
                    "N": config.N,
                    "delta": delta,
                    "p": p,
                    "node_err": float("nan"),
                    "cn_full": cn_full_z,
                    "cn_dec": cn_dec_z,
                    "kappa": float("nan"),
                    "t_construct_ms": float("nan"),
                    "t_solve_ms": float("nan"),
                    "t_select_ms": float("nan"),
                    "n_solutions": None,
                    "status": "ok",
                }
                try:
                    if method == "DH":
                        _run_dh_cell(row, noisy, truth, config, p)
                    else:
                        _run_reference_cell(row, cached, method, noisy, truth, config)
                except (SolveFailure, ValueError) as exc:
                    row["status"] = f"failed: {exc}"
                rows.append(row)
    return ExperimentReport(config=config.to_dict(), rows=tuple(rows))


def _max_node_value(values: np.ndarray, params: PronyParameters) -> float:
    """Largest condition value among the node parameters (packed layout)."""
    idx = []
    pos = 0
    for dj in params.multiplicities.parts:
        idx.append(pos + dj)
        pos += dj + 1
    return float(np.max(values[idx]))


def _run_dh_cell(row, noisy, truth, config, p):
    opts = SolveOptions(
        strategy=config.strategy,
        z_init=truth.nodes if config.strategy == "prefilter+init" else None,
        eta=config.eta,
        p_override=p,
    )
    est, diag = decimated_homotopy(noisy, config.multiplicities, opts)
    row["node_err"] = node_error(est.nodes, truth.nodes)
    row["t_construct_ms"] = diag["t_construct_ms"]
    row["t_solve_ms"] = diag["t_solve_ms"]
    row["t_select_ms"] = diag["t_select_ms"]
    row["n_solutions"] = diag["n_solutions"]
    system = build_hankel_system(
        decimate(noisy, p, config.multiplicities.num_parameters), config.multiplicities
    )
    try:
        kappa = system_sensitivity(system, est.nodes ** p, max(config.noise_level, 0.0))
        row["kappa"] = float(np.max(kappa))
    except SolveFailure:
        pass


def _run_reference_cell(row, cached, method, noisy, truth, config):
    if method not in cached:
        t0 = time.perf_counter()
        if method == "ESPRIT":
            est = esprit_estimate(noisy, config.multiplicities, EspritOptions())
        else:
            est = prony_solve(noisy, config.multiplicities)
        elapsed = 1e3 * (time.perf_counter() - t0)
        cached[method] = {
            "node_err": node_error(est.nodes, truth.nodes),
            "t_solve_ms": elapsed,
        }
    row["node_err"] = cached[method]["node_err"]
    row["t_solve_ms"] = cached[method]["t_solve_ms"]


def emit_report(report: ExperimentReport, out_dir, formats=("csv", "json")) -> list[Path]:
    """Write results.csv / report.json / curves.csv under out_dir.

    The CSV is one row per (trial, method, stride) with a fixed column
    order; curves.csv is a long-format table (trial, method, p, quantity,
    value) ready for plotting.  Returns the written paths.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = []
    if "csv" in formats:
        path = out_dir / "results.csv"
        _write_csv(path, report)
        written.append(path)
        curves = out_dir / "curves.csv"
        _write_curves(curves, report)
        written.append(curves)
    if "json" in formats:
        path = out_dir / "report.json"
        try:
            with open(path, "w") as fh:
                json.dump({"config": report.config, "rows": list(report.rows)}, fh, indent=2)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written


def _write_csv(path: Path, report: ExperimentReport) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            for row in report.rows:
                writer.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _write_curves(path: Path, report: ExperimentReport) -> None:
    quantities = ("node_err", "cn_full", "cn_dec", "kappa")
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "method", "p", "quantity", "value"])
            for row in report.rows:
                for q in quantities:
                    writer.writerow([row["trial"], row["method"], row["p"], q, row[q]])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def report_from_json(path) -> ExperimentReport:
    """Load a report previously written by emit_report."""
    with open(path) as fh:
        data = json.load(fh)
    return ExperimentReport(config=data["config"], rows=tuple(data["rows"]))
