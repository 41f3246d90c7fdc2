"""Command-line harness: sweeps, bound comparison, spectral certification,
single event simulations, and plot-data emission.

Exit codes: 0 success, 2 validation error, 3 bound violation, 4 trial failure(s).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .eventsim import SimConfig, run_simulation, trace_to_csv
from .experiments import (
    EXIT_BOUND_VIOLATION,
    EXIT_OK,
    EXIT_TRIAL_FAILURE,
    EXIT_VALIDATION,
    SpecError,
    compare_bounds,
    emit_plotdata,
    load_summary,
    parse_spec,
    run_sweep,
    write_bounds_csv,
    write_spectra_csv,
    write_sweep_csv,
    certify_spectra,
)

DEFAULT_SPECTRA_NS = (3, 4, 6)
DEFAULT_SPECTRA_CS = (2, 3, 4)
DEFAULT_SPECTRA_BETAS = (0.05, 0.15, 0.25, 0.35, 0.45)
DEFAULT_SPECTRA_GAMMAS = (0.1, 0.3, 0.5, 0.7, 0.9)


def _load_spec(args):
    with open(args.config) as fh:
        spec = parse_spec(fh.read())
    overrides = {}
    if args.seed is not None:
        overrides["seed_base"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    return replace(spec, **overrides) if overrides else spec


def _cmd_sweep(args) -> int:
    spec = _load_spec(args)
    result = run_sweep(spec)
    os.makedirs(spec.out_dir, exist_ok=True)
    csv_path = os.path.join(spec.out_dir, "sweep.csv")
    write_sweep_csv(result, csv_path)
    emit_plotdata(result, spec.out_dir)
    print(f"wrote {csv_path} ({len(result.rows)} rows)")
    if result.failures:
        print(f"{result.failures} trial failure(s) recorded", file=sys.stderr)
        return EXIT_TRIAL_FAILURE
    return EXIT_OK


def _cmd_bounds(args) -> int:
    spec = _load_spec(args)
    rows = compare_bounds(spec)
    os.makedirs(spec.out_dir, exist_ok=True)
    csv_path = os.path.join(spec.out_dir, "bounds.csv")
    write_bounds_csv(rows, csv_path)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    if any(r.violated for r in rows):
        print("bound violation detected (implementation bug)", file=sys.stderr)
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def _cmd_spectra(args) -> int:
    spec = _load_spec(args)
    if spec.mode not in ("much", "fast-much"):
        raise SpecError("spectra certification needs mode much or fast-much")
    ns = (spec.nodes_per_channel,) if spec.nodes_per_channel else DEFAULT_SPECTRA_NS
    cs = (spec.channels,) if spec.channels else DEFAULT_SPECTRA_CS
    betas = tuple(a / 2.0 for a in spec.alphas) if spec.alphas else DEFAULT_SPECTRA_BETAS
    gammas = spec.gammas or DEFAULT_SPECTRA_GAMMAS
    rows = certify_spectra(ns, cs, betas, gammas)
    os.makedirs(spec.out_dir, exist_ok=True)
    csv_path = os.path.join(spec.out_dir, "spectra.csv")
    write_spectra_csv(rows, csv_path)
    failed = [r for r in rows if not r.passed]
    print(f"wrote {csv_path} ({len(rows)} rows, {len(failed)} failed)")
    return EXIT_TRIAL_FAILURE if failed else EXIT_OK


def _cmd_simulate(args) -> int:
    spec = _load_spec(args)
    if spec.mode != "event-sim":
        raise SpecError("simulate needs mode event-sim")
    cfg = SimConfig(
        n=spec.n,
        channels=spec.channels or 1,
        alpha=spec.alphas[0],
        gamma=spec.gammas[0],
        epsilon=spec.epsilons[0],
        loss_probability=spec.loss_probability,
        staleness_mode=spec.staleness_mode,
        rng_seed=spec.seed_base,
        max_rounds=spec.max_rounds,
    )
    result = run_simulation(cfg)
    os.makedirs(spec.out_dir, exist_ok=True)
    trace_path = os.path.join(spec.out_dir, "trace.csv")
    trace_to_csv(result.trace, trace_path, cfg.channels)
    report_path = os.path.join(spec.out_dir, "simulation.json")
    with open(report_path, "w") as fh:
        json.dump(
            {
                "rounds": result.report.rounds,
                "converged": result.report.converged,
                "final_objective": result.report.final_objective,
                "time_to_convergence_s": result.time_to_convergence,
                "occupancy": result.occupancy,
                "available_tx_time_s": result.available_tx_time,
                "order_change_rounds": result.order_change_rounds,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    print(f"wrote {trace_path} and {report_path}")
    return EXIT_OK if result.report.converged else EXIT_TRIAL_FAILURE


def _cmd_plotdata(args) -> int:
    result = load_summary(args.summary)
    out = args.out or result.spec.out_dir
    paths = emit_plotdata(result, out)
    print(f"wrote {len(paths)} file(s) under {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="desynclab",
        description="Desynchronization lab: sweeps, bounds, spectra, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("sweep", _cmd_sweep),
        ("bounds", _cmd_bounds),
        ("spectra", _cmd_spectra),
        ("simulate", _cmd_simulate),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override seed_base")
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--workers", type=int, default=None, help="worker pool size")
        p.set_defaults(fn=fn)
    p = sub.add_parser("plotdata")
    p.add_argument("--summary", required=True, help="summary.json from a sweep")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(fn=_cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SpecError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
