"""Command-line interface.

Subcommands: simulate, curve, estimate, test, segment, experiment.
Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 numerical
failure.
"""

import argparse
import csv
import json
import sys

from .errors import NumericalError, SeriesFormatError
from .experiment import ExperimentGrid, run_experiment, simulate_series
from .inference import EmConfig, ModelParams, em_fit
from .noise import NoiseParams
from .process import ProcessParams, Regime
from .rng import Rng
from .segmentation import Roi, find_segments, intersect_segments
from .selection import TestConfig, bayes_factor_test
from .series import curve_table, load_series, save_series

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="percohmm",
                     description="Percolation hidden Markov models for noisy dynamic networks")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a noisy observed network series")
    sim.add_argument("--regime", required=True, choices=["er", "pr"])
    sim.add_argument("--n", type=int, required=True, help="vertex count")
    sim.add_argument("--p", type=float, required=True, help="birth rate")
    sim.add_argument("--q", type=float, required=True, help="death rate")
    sim.add_argument("--gamma", type=float, required=True, help="transition rate")
    sim.add_argument("--alpha", type=float, default=0.0, help="type-I error rate")
    sim.add_argument("--beta", type=float, default=0.0, help="type-II error rate")
    sim.add_argument("--kappa", type=float, required=True, help="observation rate; t_m = m/kappa")
    sim.add_argument("--m", type=int, required=True, help="number of observations")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--init", help="series file whose first snapshot seeds the chain")
    sim.add_argument("--out", required=True)

    cur = sub.add_parser("curve", help="emit (t, gcc_fraction, density) CSV for a series")
    cur.add_argument("--input", required=True)
    cur.add_argument("--out", required=True)

    est = sub.add_parser("estimate", help="EM parameter estimation for one regime")
    est.add_argument("--input", required=True)
    est.add_argument("--regime", required=True, choices=["er", "pr"])
    est.add_argument("--b", type=int, default=50_000, help="particles per observation time")
    est.add_argument("--h", type=int, default=10, help="lines for transition statistics")
    est.add_argument("--d", type=int, default=10, help="paths per line segment")
    est.add_argument("--psi", type=int, default=40_000, help="lines for error-rate statistics")
    est.add_argument("--max-iters", type=int, default=20)
    est.add_argument("--tol", type=float, default=0.10)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--out", required=True)

    tst = sub.add_parser("test", help="Bayes-factor test of ER vs PR")
    tst.add_argument("--input", required=True)
    tst.add_argument("--b", type=int, default=50_000)
    tst.add_argument("--forward-b", type=int, default=None,
                     help="particles for the likelihood evaluation (default: --b)")
    tst.add_argument("--trials", type=int, default=10)
    tst.add_argument("--h", type=int, default=10)
    tst.add_argument("--d", type=int, default=10)
    tst.add_argument("--psi", type=int, default=40_000)
    tst.add_argument("--max-iters", type=int, default=20)
    tst.add_argument("--tol", type=float, default=0.10)
    tst.add_argument("--seed", type=int, default=0)
    tst.add_argument("--out", required=True)

    seg = sub.add_parser("segment", help="find percolation-consistent segments")
    seg.add_argument("--input", required=True)
    seg.add_argument("--roi-start", type=float, required=True)
    seg.add_argument("--roi-end", type=float, required=True)
    seg.add_argument("--metric", choices=["gcc", "density", "both"], default="both")
    seg.add_argument("--out", required=True)

    exp = sub.add_parser("experiment", help="run a replicated simulation grid")
    exp.add_argument("--config", required=True, help="grid definition (JSON)")
    exp.add_argument("--out-dir", required=True)
    exp.add_argument("--workers", type=int, default=None)
    return parser


def _cmd_simulate(args) -> int:
    params = ModelParams(ProcessParams(args.p, args.q, args.gamma),
                         NoiseParams(args.alpha, args.beta))
    init = None
    if args.init:
        init = load_series(args.init).snapshots[0]
    series = simulate_series(Regime.parse(args.regime), params, args.n, args.m,
                             args.kappa, Rng(args.seed), init=init)
    save_series(series, args.out)
    return EXIT_OK


def _cmd_curve(args) -> int:
    series = load_series(args.input)
    table = curve_table(series)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "gcc_fraction", "density"])
        for t, gcc, dens in table:
            writer.writerow([repr(float(t)), repr(float(gcc)), repr(float(dens))])
    return EXIT_OK


def _cmd_estimate(args) -> int:
    series = load_series(args.input)
    config = EmConfig(n_particles=args.b, h_lines=args.h, d_paths=args.d,
                      psi_lines=args.psi, max_iters=args.max_iters, tol=args.tol)
    params, diag = em_fit(series, Regime.parse(args.regime), config, Rng(args.seed))
    out = {
        "params": params.to_dict(),
        "diagnostics": {
            "converged": diag.converged,
            "iterations": diag.n_iters,
            "rel_changes": diag.rel_changes,
            "trace": [list(v) for v in diag.trace],
            "held": diag.held,
            "seconds": diag.seconds,
        },
    }
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _cmd_test(args) -> int:
    series = load_series(args.input)
    config = TestConfig(
        trials=args.trials,
        em=EmConfig(n_particles=args.b, h_lines=args.h, d_paths=args.d,
                    psi_lines=args.psi, max_iters=args.max_iters, tol=args.tol),
        forward_particles=args.forward_b)
    result = bayes_factor_test(series, config, Rng(args.seed))
    with open(args.out, "w") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _cmd_segment(args) -> int:
    series = load_series(args.input)
    roi = Roi(args.roi_start, args.roi_end)
    if args.metric == "both":
        segments = intersect_segments(series, roi)
    else:
        segments = find_segments(series, roi, args.metric)
    records = [{"a": s.a, "b": s.b,
                "t_a": float(series.times[s.a]), "t_b": float(series.times[s.b]),
                "metric": args.metric} for s in segments]
    with open(args.out, "w") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _grid_from_config(path) -> ExperimentGrid:
    with open(path) as fh:
        raw = json.load(fh)
    truth = raw.pop("truth")
    params = ModelParams(
        ProcessParams(truth["p"], truth["q"], truth["gamma"]),
        NoiseParams(truth["alpha"], truth["beta"]))
    return ExperimentGrid(truth=params, **raw)


def _cmd_experiment(args) -> int:
    try:
        grid = _grid_from_config(args.config)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SeriesFormatError(f"bad experiment config: {exc}") from exc
    if args.workers is not None:
        grid.workers = args.workers
    out = run_experiment(grid, args.out_dir)
    failed = sum(1 for r in out["records"] if r["status"] != "ok")
    print(f"wrote {len(out['records'])} records ({failed} failed) to {out['records_path']}")
    print(f"summary: {out['summary_path']}")
    return EXIT_NUMERICAL if failed else EXIT_OK


_HANDLERS = {
    "simulate": _cmd_simulate,
    "curve": _cmd_curve,
    "estimate": _cmd_estimate,
    "test": _cmd_test,
    "segment": _cmd_segment,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SeriesFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
