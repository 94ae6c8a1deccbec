"""Command-line interface.

One subcommand per experiment kind; flags override scenario-file values.
Exit codes: 0 success, 1 configuration error, 2 numerical-check failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import (
    EXPERIMENT_KINDS,
    ExperimentSpec,
    NumericalCheckError,
    builtin_scenarios,
    resolve_scenario,
    run,
)
from .params import ScenarioError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afdmsim",
        description=(
            "Chirp-multicarrier ISAC simulation: delay-Doppler maps, ambiguity "
            "surfaces, metric sweeps, detection and BER Monte Carlo, and "
            "runtime scaling. Results are written as plot-ready CSV plus a "
            "manifest.json with the fully resolved configuration."
        ),
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    builtin_names = ", ".join(sorted(builtin_scenarios()))
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind.replace("_", "-"), help=f"run the {kind} experiment")
        p.add_argument(
            "--scenario",
            default="table1",
            help=f"scenario file or builtin name ({builtin_names})",
        )
        p.add_argument(
            "--preset",
            action="append",
            choices=("proposed", "classic", "ofdm", "ocdm"),
            help="waveform preset (repeatable; default: scenario preset)",
        )
        p.add_argument(
            "--algorithm",
            action="append",
            choices=("tfmf", "dechirp", "ddmf"),
            help="sensing algorithm (repeatable; default: all applicable)",
        )
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials")
        p.add_argument("--snr", type=float, nargs="+", default=None, help="SNR grid (dB)")
        p.add_argument("--po", type=float, nargs="+", default=None, help="pilot-overhead grid")
        p.add_argument(
            "--sizes", type=int, nargs="+", default=None, help="symbol sizes for runtime scaling"
        )
        p.add_argument(
            "--pilot-only-reference",
            action="store_true",
            help="match tfmf against the pilot only instead of the full transmit signal",
        )
        p.add_argument(
            "--out",
            default=None,
            help="output directory (default: $AFDMSIM_OUT or ./afdmsim_out)",
        )
    return parser


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    scenario = resolve_scenario(args.scenario)
    out = args.out or os.environ.get("AFDMSIM_OUT") or "afdmsim_out"
    spec = ExperimentSpec(
        kind=args.kind.replace("-", "_"),
        scenario=scenario,
        out_dir=Path(out),
        presets=tuple(args.preset) if args.preset else (),
        tfmf_reference="pilot" if args.pilot_only_reference else "transmit",
    )
    if args.algorithm:
        spec = replace(spec, algorithms=tuple(args.algorithm))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.trials is not None:
        spec = replace(spec, trials=args.trials)
    if args.snr is not None:
        spec = replace(spec, snr_db_list=tuple(args.snr))
    if args.po is not None:
        spec = replace(spec, po_list=tuple(args.po))
    if args.sizes is not None:
        spec = replace(spec, sizes=tuple(args.sizes))
    return spec


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = _spec_from_args(args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        written = run(spec)
    except NumericalCheckError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
