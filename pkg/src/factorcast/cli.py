"""Command-line experiment driver.

Verbs: ``synth`` generates a synthetic dataset, ``mask`` emits an observation
pattern, ``run`` streams one experiment, ``sweep`` scans a parameter axis, and
``verify`` executes the built-in invariant checks. Output tables are plain
delimited text (plus JSON sidecars) and are byte-identical across reruns with
the same flags; progress and timing go to stderr only.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .data import (SeriesMatrix, TableFormat, gen_structured_mask, gen_synthetic,
                   gen_unstructured_mask, load_matrix, normalize, read_mask,
                   write_mask, write_matrix, write_results)
from .experiments import (ALL_METHODS, ELECTRICITY_CONFIG, SWEEP_AXES, TRAFFIC_CONFIG,
                          ExperimentConfig, mae, run_experiment, run_replicate, run_sweep)


def _fmt(x):
    return format(float(x), ".17g")


def _add_data_args(parser):
    parser.add_argument("--data", required=True, help="delimited series matrix, one row per series")
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--decimal", default=".")
    parser.add_argument("--header-rows", type=int, default=0)
    parser.add_argument("--index-cols", type=int, default=0)
    parser.add_argument("--aggregate", choices=["none", "hourly_mean", "hourly_sum"], default="none")
    parser.add_argument("--aggregate-block", type=int, default=4)
    parser.add_argument("--transpose", action="store_true",
                        help="input table has one row per time step")
    parser.add_argument("--per-row-norm", action="store_true",
                        help="normalize each series by its own max instead of the global max")


def _add_model_args(parser):
    parser.add_argument("--method", default="ft", choices=ALL_METHODS)
    parser.add_argument("--preset", choices=["electricity", "traffic"],
                        help="start from a benchmark parameter set")
    parser.add_argument("--rank", type=int, help="latent rank")
    parser.add_argument("--ar-order", type=int)
    parser.add_argument("--r0", type=float, help="AR coefficient prior scale")
    parser.add_argument("--rho-u", type=float)
    parser.add_argument("--rho-v", type=float)
    parser.add_argument("--eps", type=float, help="tolerance of the ft method")
    parser.add_argument("--max-ite", type=int)
    parser.add_argument("--zt-v-prior", action="store_true",
                        help="include the latent prior pull in the zt v-update")
    parser.add_argument("--fill", choices=["predict", "zero"], default="predict",
                        help="missing-value fill for the ar baseline")


def _add_mask_args(parser):
    parser.add_argument("--nnz", type=float, help="unstructured mask: observed fraction")
    parser.add_argument("--exact-per-column", action="store_true")
    parser.add_argument("--arrival", type=float, help="structured mask: failure rate")
    parser.add_argument("--departure", type=float, help="structured mask: recovery rate")
    parser.add_argument("--mask-file", help="use a fixed 0/1 mask table")


def _load_series(args):
    fmt = TableFormat(
        delimiter=args.delimiter,
        decimal_separator=args.decimal,
        header_rows=args.header_rows,
        index_cols=args.index_cols,
        aggregate=args.aggregate,
        aggregate_block=args.aggregate_block,
        transpose=args.transpose,
    )
    matrix = load_matrix(args.data, fmt)
    return normalize(matrix, per_row=args.per_row_norm)


def _model_params(args):
    preset = {"electricity": ELECTRICITY_CONFIG, "traffic": TRAFFIC_CONFIG}.get(args.preset)
    params = dict(preset) if preset else dict(ELECTRICITY_CONFIG)
    overrides = {
        "n_factors": args.rank, "ar_order": args.ar_order, "prior_scale": args.r0,
        "rho_u": args.rho_u, "rho_v": args.rho_v, "eps": args.eps, "max_ite": args.max_ite,
    }
    params.update({k: v for k, v in overrides.items() if v is not None})
    params["zt_use_v_prior"] = args.zt_v_prior
    params["fill"] = args.fill
    return params


def _mask_spec(args, series):
    given = [args.nnz is not None, args.arrival is not None or args.departure is not None,
             args.mask_file is not None]
    if sum(given) > 1:
        raise SystemExit("choose one of --nnz, --arrival/--departure, --mask-file")
    if args.nnz is not None:
        return "unstructured", {"nnz_fraction": args.nnz,
                                "exact_per_column": args.exact_per_column}, None
    if args.arrival is not None or args.departure is not None:
        if args.arrival is None or args.departure is None:
            raise SystemExit("structured masks need both --arrival and --departure")
        return "structured", {"arrival_rate": args.arrival, "departure_rate": args.departure}, None
    if args.mask_file is not None:
        fixed = read_mask(args.mask_file)
        if fixed.observed.shape != series.values.shape:
            raise SystemExit("mask file shape does not match the data")
        return "fixed", {}, fixed
    return "full", {}, None


def _write_table(path, header, rows):
    lines = [header] + rows
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_synth(args):
    theta = np.array([float(v) for v in args.theta.split(",")])
    matrix = gen_synthetic(
        n_series=args.n_series, n_factors=args.rank, ar_order=theta.size,
        theta_star=theta, noise_scales=(args.noise_u, args.noise_v, args.noise_x),
        n_steps=args.n_steps, seed=args.seed,
    )
    metadata = {
        "kind": "synthetic", "n_series": args.n_series, "n_steps": args.n_steps,
        "rank": args.rank, "theta": theta.tolist(),
        "noise": [args.noise_u, args.noise_v, args.noise_x],
        "seed": args.seed, "scale": matrix.scale,
    }
    write_matrix(matrix, args.out, metadata)
    print(f"wrote {args.n_series}x{args.n_steps} synthetic matrix to {args.out}")
    return 0


def cmd_mask(args):
    if args.nnz is not None:
        mask = gen_unstructured_mask(args.n_series, args.n_steps, args.nnz, args.seed,
                                     exact_per_column=args.exact_per_column)
    elif args.arrival is not None and args.departure is not None:
        mask = gen_structured_mask(args.n_series, args.n_steps, args.arrival,
                                   args.departure, args.seed)
    else:
        raise SystemExit("mask needs --nnz or --arrival/--departure")
    write_mask(mask, args.out)
    frac = float(np.mean(mask.observed))
    print(f"wrote {mask.kind} mask to {args.out} (observed fraction {frac:.4f})")
    return 0


def cmd_run(args):
    started = time.perf_counter()
    series = _load_series(args)
    params = _model_params(args)
    mask_kind, mask_params, fixed = _mask_spec(args, series)
    config = ExperimentConfig(
        method=args.method, params=params, mask_kind=mask_kind, mask_params=mask_params,
        n_replicates=args.replicates, base_seed=args.seed, fixed_mask=fixed,
    )
    summary = run_experiment(series, config)
    metadata = {
        "method": args.method, "params": params, "mask_kind": mask_kind,
        "mask_params": mask_params, "replicates": args.replicates, "base_seed": args.seed,
        "data": str(args.data), "data_fingerprint": series.fingerprint(),
        "scale": series.scale if np.ndim(series.scale) == 0 else list(map(float, series.scale)),
    }
    if args.out:
        rows = [f"{i},{_fmt(m)}" for i, m in enumerate(summary.maes)]
        rows.append(f"mean,{_fmt(summary.mean_mae)}")
        rows.append(f"std,{_fmt(summary.std_mae)}")
        _write_table(args.out, "replicate,mae", rows)
    if args.records:
        records = run_replicate(series, config, 0)
        write_results(records, metadata, args.records)
    for i, m in enumerate(summary.maes):
        print(f"replicate {i}: mae {_fmt(m)}")
    print(f"mean {_fmt(summary.mean_mae)} std {_fmt(summary.std_mae)}")
    print(f"elapsed {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return 0


def cmd_sweep(args):
    started = time.perf_counter()
    series = _load_series(args)
    params = _model_params(args)
    mask_kind, mask_params, fixed = _mask_spec(args, series)
    config = ExperimentConfig(
        method="ft", params=params, mask_kind=mask_kind, mask_params=mask_params,
        n_replicates=args.replicates, base_seed=args.seed, fixed_mask=fixed,
    )
    values = [float(v) for v in args.values.split(",")]
    methods = [m.strip() for m in args.methods.split(",")]
    rows = run_sweep(series, config, args.axis, values, methods, jobs=args.jobs)
    table = [
        f"{r.axis},{_fmt(r.value)},{r.method},{r.n_replicates},{_fmt(r.mean_mae)},{_fmt(r.std_mae)}"
        for r in rows
    ]
    _write_table(args.out, "axis,value,method,replicates,mean_mae,std_mae", table)
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    print(f"elapsed {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return 0


def cmd_verify(args):
    return verify_mod.run_checks(fast=args.fast)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="factorcast",
        description="streaming matrix-factorization forecasting experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--n-series", type=int, default=50)
    p_synth.add_argument("--n-steps", type=int, default=2000)
    p_synth.add_argument("--rank", type=int, default=5)
    p_synth.add_argument("--theta", default="1.1,-0.3", help="comma-separated AR coefficients")
    p_synth.add_argument("--noise-u", type=float, default=0.005)
    p_synth.add_argument("--noise-v", type=float, default=0.05)
    p_synth.add_argument("--noise-x", type=float, default=0.01)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=cmd_synth)

    p_mask = sub.add_parser("mask", help="generate an observation mask")
    p_mask.add_argument("--n-series", type=int, required=True)
    p_mask.add_argument("--n-steps", type=int, required=True)
    _add_mask_args(p_mask)
    p_mask.add_argument("--seed", type=int, default=0)
    p_mask.add_argument("--out", required=True)
    p_mask.set_defaults(func=cmd_mask)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_data_args(p_run)
    _add_model_args(p_run)
    _add_mask_args(p_run)
    p_run.add_argument("--replicates", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", help="summary table path")
    p_run.add_argument("--records", help="per-step record table path (replicate 0)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter axis")
    _add_data_args(p_sweep)
    _add_model_args(p_sweep)
    _add_mask_args(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, help="comma-separated axis values")
    p_sweep.add_argument("--methods", default=",".join(ALL_METHODS))
    p_sweep.add_argument("--replicates", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the built-in invariant checks")
    p_verify.add_argument("--fast", action="store_true", help="smaller sample sizes")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
