"""Command-line frontend.

Subcommands: analyze (single operating point), sweep (tables over a
parameter axis or a named preset), simulate (Monte Carlo run), validate
(analytic vs simulation comparison). Data goes to CSV/JSON; --plot
additionally renders a figure file next to the data output.

Exit codes: 0 success, 1 solver failure, 2 usage/validation error,
3 validation threshold failure.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analytic import SWEEP_AXES, solve_fixed_point, sweep, sweep_to_csv, sweep_to_json
from .errors import ParameterError, SolverError
from .figures import (PRESET_NAMES, figure_preset, preset_table,
                      preset_table_to_csv, preset_table_to_json,
                      preset_validation_points)
from .params import (MODEL_KEYS, SENSING_DYNAMICS, params_from_key_values,
                     parse_key_value_text)
from .simulate import (DEFAULT_WARMUP, SENSING_SCOPES, SimConfig, ValidationRow,
                       run_simulation, stats_to_json, validate,
                       validation_rows_to_csv)

SIM_KEYS = ("slots", "seed", "warmup", "sensing_scope")

_PRESET_HELP = ("named sweep recipes: fig3/fig4 detection-window curves "
                "(tau/p_c vs n), fig5/fig6 backoff-stage curves, "
                "fig7/fig8 activity/channel-count curves")


def _add_model_args(p):
    p.add_argument("--config", metavar="FILE",
                   help="key=value file; flags override file values")
    p.add_argument("--n", type=int, help="number of stations")
    p.add_argument("--W", type=int, help="minimum contention window")
    p.add_argument("--m", type=int, help="maximum backoff stage")
    p.add_argument("--C", type=int, help="number of sensed channels")
    p.add_argument("--a", type=float, help="per-channel primary activity")
    p.add_argument("--pd", type=float, help="detection probability")
    p.add_argument("--pf", type=float, help="explicit false-alarm probability")
    p.add_argument("--snr-db", dest="snr_db", type=float,
                   help="sensed SNR (dB) for derived false alarm")
    p.add_argument("--ts", type=float, help="sensing time (s) for derived false alarm")
    p.add_argument("--fs", type=float, help="sampling frequency (Hz) for derived false alarm")
    p.add_argument("--sensing-dynamics", dest="sensing_dynamics",
                   choices=SENSING_DYNAMICS, help="occupancy dynamics")


def _add_sim_args(p):
    p.add_argument("--slots", type=int, help="simulated slots (default 100000)")
    p.add_argument("--seed", type=int, help="RNG seed (default 1)")
    p.add_argument("--warmup", type=int,
                   help=f"slots discarded before statistics (default {DEFAULT_WARMUP})")
    p.add_argument("--sensing-scope", dest="sensing_scope", choices=SENSING_SCOPES,
                   help="per-station: independent sensing per station (default); "
                        "global: one shared draw per slot")
    p.add_argument("--pu-hits-collide", action="store_true", default=None,
                   help="escalate backoff when an attempt lands on a truly busy channel")


def _read_config_file(path):
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"config: {exc}") from None
    kv = parse_key_value_text(text)
    allowed = set(MODEL_KEYS) | set(SIM_KEYS)
    for key in kv:
        if key not in allowed:
            raise ParameterError(f"{key}: unknown config key")
    return kv


def _build_params(args, filekv):
    kv = {k: v for k, v in filekv.items() if k in MODEL_KEYS}
    for key in MODEL_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            kv[key] = flag
    return params_from_key_values(kv)


def _int_option(kv, args, key, default):
    v = getattr(args, key, None)
    if v is None and key in kv:
        try:
            v = int(kv[key])
        except ValueError:
            raise ParameterError(f"{key}: must be an integer") from None
    return default if v is None else v


def _sim_options(args, filekv):
    slots = _int_option(filekv, args, "slots", 100_000)
    seed = _int_option(filekv, args, "seed", 1)
    warmup = _int_option(filekv, args, "warmup", DEFAULT_WARMUP)
    scope = getattr(args, "sensing_scope", None) or filekv.get("sensing_scope",
                                                               "per-station")
    return slots, seed, warmup, scope


def _write_output(text, out):
    if out is None:
        sys.stdout.write(text)
        return None
    path = Path(out)
    path.write_text(text)
    return path


def _worker_count():
    raw = os.environ.get("COGMAC_THREADS", "")
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise ParameterError("COGMAC_THREADS: must be an integer") from None
    if count < 1:
        raise ParameterError("COGMAC_THREADS: must be >= 1")
    return count


# --- analyze -------------------------------------------------------------

def cmd_analyze(args):
    params = _build_params(args, _read_config_file(args.config))
    rows = sweep(params, "n", [params.n])
    row = rows[0]
    if row.error is not None:
        raise SolverError(row.error)
    if args.format == "table":
        op = solve_fixed_point(params)
        pf = params.false_alarm
        lines = [f"n           = {params.n}",
                 f"W           = {params.W}",
                 f"m           = {params.m}",
                 f"C           = {params.C}",
                 f"a           = {format(params.a, '.17g')}",
                 f"P_d         = {format(params.p_d, '.17g')}",
                 f"P_f         = {format(pf, '.17g')}"
                 + ("  (derived)" if params.detection_derived else ""),
                 f"q           = {format(params.busy_probability, '.17g')}",
                 f"tau         = {format(op.tau, '.17g')}",
                 f"p_c         = {format(op.p, '.17g')}",
                 f"iterations  = {op.iterations}",
                 f"residual    = {format(op.residual, '.3g')}"]
        print("\n".join(lines))
    elif args.format == "csv":
        sys.stdout.write(sweep_to_csv(rows))
    else:
        sys.stdout.write(sweep_to_json(rows))
    return 0


# --- sweep ---------------------------------------------------------------

def _parse_axis_values(args):
    if args.values:
        try:
            return [float(v) for v in args.values.split(",") if v != ""]
        except ValueError:
            raise ParameterError("values: must be a comma-separated number list") from None
    if args.from_ is None or args.to is None:
        raise ParameterError("values: give --values or --from/--to[/--step]")
    step = args.step if args.step is not None else 1.0
    if step <= 0:
        raise ParameterError("step: must be positive")
    vals = []
    v = args.from_
    while v <= args.to + 1e-12:
        vals.append(v)
        v += step
    if not vals:
        raise ParameterError("values: empty range")
    return vals


def cmd_sweep(args):
    if args.plot and args.out is None:
        raise ParameterError("plot: requires --out")
    if args.preset:
        preset = figure_preset(args.preset)
        header, rows = preset_table(preset)
        text = (preset_table_to_csv(header, rows) if args.format == "csv"
                else preset_table_to_json(header, rows))
        path = _write_output(text, args.out)
        if path is not None:
            print(f"wrote {len(rows)} rows to {path}")
        if args.plot:
            from .plotting import plot_preset_table
            png = Path(args.out).with_suffix(".png")
            plot_preset_table(preset, header, rows, png)
            print(f"wrote figure to {png}")
        return 0

    if not args.axis:
        raise ParameterError("axis: give --axis or --preset")
    params = _build_params(args, _read_config_file(args.config))
    values = _parse_axis_values(args)
    rows = sweep(params, args.axis, values)
    failed = [r for r in rows if r.error is not None]
    for r in failed:
        print(f"warning: {r.axis}={r.value}: {r.error}", file=sys.stderr)
    text = sweep_to_csv(rows) if args.format == "csv" else sweep_to_json(rows)
    path = _write_output(text, args.out)
    if path is not None:
        print(f"wrote {len(rows)} rows to {path}")
    if args.plot:
        from .plotting import plot_sweep_rows
        png = Path(args.out).with_suffix(".png")
        plot_sweep_rows(rows, png, title=f"sweep over {args.axis}")
        print(f"wrote figure to {png}")
    return 0 if len(failed) < len(rows) else 1


# --- simulate ------------------------------------------------------------

def cmd_simulate(args):
    filekv = _read_config_file(args.config)
    params = _build_params(args, filekv)
    slots, seed, warmup, scope = _sim_options(args, filekv)
    config = SimConfig(params=params, slots=slots, seed=seed, warmup_slots=warmup,
                       sensing_scope=scope,
                       pu_hits_collide=bool(args.pu_hits_collide))
    stats = run_simulation(config)
    text = stats_to_json(stats, config)
    path = _write_output(text, args.out)
    echo = f"seed={seed} rng={stats.rng}"
    if path is not None:
        print(f"{echo} wrote {path}")
    else:
        print(echo, file=sys.stderr)
    return 0


# --- validate ------------------------------------------------------------

def _validate_point_task(task):
    label, params, slots, seed, warmup, scope, threshold = task
    rows, _ = validate(params, slots=slots, seed=seed, warmup=warmup,
                       sensing_scope=scope, threshold=threshold)
    if label:
        rows = [ValidationRow(f"{r.metric}[{label}]", r.analytic, r.simulated,
                              r.rel_err, r.passed) for r in rows]
    return rows


def cmd_validate(args):
    filekv = _read_config_file(args.config)
    slots, seed, warmup, scope = _sim_options(args, filekv)
    threshold = args.threshold
    if args.plot and args.out is None:
        raise ParameterError("plot: requires --out")

    if args.preset:
        preset = figure_preset(args.preset)
        points = preset_validation_points(preset)
        tasks = [(label, params, slots, seed + i, warmup, scope, threshold)
                 for i, (label, params) in enumerate(points)]
    else:
        params = _build_params(args, filekv)
        tasks = [("", params, slots, seed, warmup, scope, threshold)]

    workers = _worker_count()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_point = list(pool.map(_validate_point_task, tasks))
    else:
        per_point = [_validate_point_task(t) for t in tasks]
    rows = [r for chunk in per_point for r in chunk]

    text = validation_rows_to_csv(rows)
    path = _write_output(text, args.out)
    checked = [r for r in rows if r.passed is not None]
    n_pass = sum(1 for r in checked if r.passed)
    print(f"passed {n_pass}/{len(checked)} thresholded comparisons "
          f"(threshold {threshold:.1%})", file=sys.stderr if path is None else sys.stdout)
    if args.plot:
        from .plotting import plot_validation_report
        png = Path(args.out).with_suffix(".png")
        plot_validation_report([(r.metric, r) for r in rows], png, threshold)
        print(f"wrote figure to {png}")
    return 0 if n_pass == len(checked) else 3


# --- parser --------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="cogmac",
        description="Saturation CSMA/CA performance model with imperfect "
                    "multi-channel spectrum sensing",
        epilog=_PRESET_HELP)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="solve one operating point")
    _add_model_args(p)
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="table over a parameter axis or preset",
                       epilog=_PRESET_HELP)
    _add_model_args(p)
    p.add_argument("--axis", choices=SWEEP_AXES)
    p.add_argument("--values", help="comma-separated axis values")
    p.add_argument("--from", dest="from_", type=float, help="range start")
    p.add_argument("--to", type=float, help="range end (inclusive)")
    p.add_argument("--step", type=float, help="range step (default 1)")
    p.add_argument("--preset", choices=PRESET_NAMES, help=_PRESET_HELP)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", action="store_true",
                   help="also render a figure next to --out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo run")
    _add_model_args(p)
    _add_sim_args(p)
    p.add_argument("--out", help="stats JSON file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="analytic vs simulation comparison",
                       epilog=_PRESET_HELP)
    _add_model_args(p)
    _add_sim_args(p)
    p.add_argument("--preset", choices=PRESET_NAMES, help=_PRESET_HELP)
    p.add_argument("--threshold", type=float, default=0.03,
                   help="relative error threshold (default 0.03)")
    p.add_argument("--out", help="report CSV file (default stdout)")
    p.add_argument("--plot", action="store_true",
                   help="also render a figure next to --out")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
