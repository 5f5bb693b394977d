"""Command-line interface.

Subcommands: solve (decimated homotopy), prony and esprit (baselines),
condition (sensitivity diagnostics), experiment (seeded sweep with CSV/JSON
output and rendered figures).  Exit codes: 0 success, 2 solver failure,
3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .classical import prony_solve
from .conditioning import (
    condition_numbers_decimated,
    condition_numbers_full,
)
from .errors import SolveFailure
from .esprit import EspritOptions, esprit_estimate
from .model import MeasurementSequence, MultiplicityVector, PronyParameters
from .pipeline import (
    ExperimentConfig,
    SolveOptions,
    decimated_homotopy,
    emit_report,
    run_experiment,
)

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_BAD_INPUT = 3


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with the bad-input code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _complex_pairs(data) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data], dtype=complex)


def _load_measurements(path) -> MeasurementSequence:
    with open(path) as fh:
        data = json.load(fh)
    if "measurements" not in data:
        raise ValueError(f"{path}: missing 'measurements' key")
    return MeasurementSequence(_complex_pairs(data["measurements"]))


def _load_params(path) -> PronyParameters:
    with open(path) as fh:
        data = json.load(fh)
    for key in ("nodes", "coefficients", "multiplicities"):
        if key not in data:
            raise ValueError(f"{path}: missing {key!r} key")
    D = MultiplicityVector(tuple(data["multiplicities"]))
    nodes = _complex_pairs(data["nodes"])
    coeffs = tuple(_complex_pairs(block) for block in data["coefficients"])
    return PronyParameters(nodes, coeffs, D)


def _parse_mult(text) -> MultiplicityVector:
    try:
        return MultiplicityVector(tuple(int(x) for x in text.split(",") if x))
    except ValueError as exc:
        raise ValueError(f"bad multiplicity list {text!r}: {exc}") from exc


def _parse_init(text) -> np.ndarray:
    out = []
    for chunk in text.split(";"):
        re_s, im_s = chunk.split(",")
        out.append(complex(float(re_s), float(im_s)))
    return np.array(out, dtype=complex)


def _params_json(params: PronyParameters, diagnostics=None) -> dict:
    data = {
        "nodes": [[z.real, z.imag] for z in params.nodes],
        "coefficients": [[[c.real, c.imag] for c in block] for block in params.coefficients],
        "multiplicities": list(params.multiplicities.parts),
    }
    if diagnostics is not None:
        data["diagnostics"] = diagnostics
    return data


def _write_json(path, data) -> None:
    text = json.dumps(data, indent=2)
    if path is None or path == "-":
        print(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pronydh", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="decimated-homotopy node recovery")
    solve.add_argument("--input", required=True, help="JSON with {'measurements': [[re,im],...]}")
    solve.add_argument("--mult", required=True, help="comma-separated multiplicities, e.g. 2,2")
    solve.add_argument(
        "--strategy",
        choices=["exhaustive", "prefilter", "init"],
        default="prefilter",
        help="pruning strategy ('init' = prefilter plus initial-guess filter)",
    )
    solve.add_argument("--p", type=int, default=None, help="decimation stride override")
    solve.add_argument("--eta", type=float, default=None, help="initial-guess radius (default 1/N)")
    solve.add_argument("--init", default=None, help="initial nodes as 're,im;re,im;...'")
    solve.add_argument("--out", default=None, help="output JSON path (default: stdout)")

    prony = sub.add_parser("prony", help="classical Prony baseline")
    prony.add_argument("--input", required=True)
    prony.add_argument("--mult", required=True)
    prony.add_argument("--out", default=None)

    esprit = sub.add_parser("esprit", help="generalized ESPRIT baseline")
    esprit.add_argument("--input", required=True)
    esprit.add_argument("--mult", required=True)
    esprit.add_argument("--window", type=int, default=None, help="Hankel window length (default N//2)")
    esprit.add_argument("--out", default=None)

    condition = sub.add_parser("condition", help="condition-number diagnostics")
    condition.add_argument("--params", required=True, help="JSON with nodes/coefficients/multiplicities")
    condition.add_argument("--N", type=int, default=None, help="full-map measurement count")
    condition.add_argument("--p", type=int, default=None, help="decimation stride")

    experiment = sub.add_parser("experiment", help="seeded sweep with CSV/JSON/figures")
    experiment.add_argument("--config", required=True, help="experiment config JSON")
    experiment.add_argument("--out-dir", required=True)
    experiment.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def _cmd_solve(args) -> int:
    meas = _load_measurements(args.input)
    D = _parse_mult(args.mult)
    strategy = {"exhaustive": "exhaustive", "prefilter": "prefilter", "init": "prefilter+init"}[
        args.strategy
    ]
    z_init = _parse_init(args.init) if args.init else None
    opts = SolveOptions(
        strategy=strategy, z_init=z_init, eta=args.eta, p_override=args.p
    )
    params, diagnostics = decimated_homotopy(meas, D, opts)
    _write_json(args.out, _params_json(params, diagnostics))
    return EXIT_OK


def _cmd_prony(args) -> int:
    meas = _load_measurements(args.input)
    params = prony_solve(meas, _parse_mult(args.mult))
    _write_json(args.out, _params_json(params))
    return EXIT_OK


def _cmd_esprit(args) -> int:
    meas = _load_measurements(args.input)
    params = esprit_estimate(meas, _parse_mult(args.mult), EspritOptions(window=args.window))
    _write_json(args.out, _params_json(params))
    return EXIT_OK


def _cmd_condition(args) -> int:
    params = _load_params(args.params)
    out = {"labels": list(params.parameter_labels())}
    if args.N is None and args.p is None:
        raise ValueError("condition requires --N and/or --p")
    if args.N is not None:
        report = condition_numbers_full(params, args.N)
        out.update({k: v for k, v in report.to_dict().items() if v is not None})
    if args.p is not None:
        report = condition_numbers_decimated(params, args.p)
        out.update({k: v for k, v in report.to_dict().items() if v is not None})
    _write_json(None, out)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    with open(args.config) as fh:
        config = ExperimentConfig.from_dict(json.load(fh))
    report = run_experiment(config)
    written = emit_report(report, args.out_dir)
    if not args.no_figures:
        from .plots import render_experiment_figures

        written.extend(render_experiment_figures(report, args.out_dir))
    for path in written:
        print(path)
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "prony": _cmd_prony,
    "esprit": _cmd_esprit,
    "condition": _cmd_condition,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SolveFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
