"""Command line front end.

Subcommands: run (benchmark from a config file), zeta (arc approximation
error table), spark (dictionary spark bound via nullspace probes),
lambda-sweep (CCBP penalty sweep), gen-config (write a commented default
config).  Exit status is 0 on success, 1 on a configuration or runtime
error, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from . import bench
from .analysis import compute_zeta, lambda_sweep
from .conic import spark_bound
from .dictionary import build_dictionary
from .signals import PulseSpec, SamplingGrid

ZETA_HEADER = "model,c,zeta,bomp_max_error,b_worst,samples"


def _parse_c_range(text: str) -> list[int]:
    """Accept '3', '1,3,5' or '1..10'."""
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        start, stop = int(lo), int(hi)
        if stop < start:
            raise ValueError(f"empty range {text!r}")
        return list(range(start, stop + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarcpe",
        description="Compressive time-delay estimation benchmarks and analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark case from a config file")
    p_run.add_argument("--config", required=True, help="path to a key=value config file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--jobs", type=int, default=None, help="worker processes for trials")
    p_run.add_argument("--output", default=None, help="override the config output path")
    p_run.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )

    p_zeta = sub.add_parser("zeta", help="tabulate arc approximation error vs redundancy")
    p_zeta.add_argument("--problem", choices=("tde", "fe"), default="tde")
    p_zeta.add_argument("--c", default="1..10", help="redundancy values: '3', '1,3,5' or '1..10'")
    p_zeta.add_argument("--samples", type=int, default=100, help="offsets sampled per arc")
    p_zeta.add_argument("--n", type=int, default=0, help="signal length (0 = problem default)")
    p_zeta.add_argument("--output", default=None, help="CSV path (default stdout)")

    p_spark = sub.add_parser("spark", help="upper-bound the dictionary spark")
    p_spark.add_argument("--problem", choices=("tde", "fe"), default="fe")
    p_spark.add_argument("--c", type=int, default=5)
    p_spark.add_argument("--mode", choices=("complex", "nonneg"), default="complex")
    p_spark.add_argument("--probes", type=int, default=10, help="number of nullspace probes")
    p_spark.add_argument("--n", type=int, default=0, help="signal length (0 = problem default)")
    p_spark.add_argument("--seed", type=int, default=0)

    p_sweep = sub.add_parser("lambda-sweep", help="sweep the CCBP penalty weight")
    p_sweep.add_argument("--lambdas", default="1,1e3,1e6", help="comma separated weights")
    p_sweep.add_argument("--kappas", default="0.4", help="comma separated subsampling ratios")
    p_sweep.add_argument("--snrs", default="1000", help="comma separated SNRs (inf allowed)")
    p_sweep.add_argument("--trials", type=int, default=5)
    p_sweep.add_argument("--n", type=int, default=100)
    p_sweep.add_argument("--c", type=int, default=5)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--output", default="lambda_sweep.csv")

    p_gen = sub.add_parser("gen-config", help="write a commented default config file")
    p_gen.add_argument("--output", default="experiment.conf")

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    overrides: dict[str, str] = {}
    for item in args.override:
        if "=" not in item:
            print(f"bad --override {item!r}: expected KEY=VALUE", file=sys.stderr)
            return 1
        key, _, value = item.partition("=")
        overrides[key.strip()] = value
    config = bench.parse_config_file(args.config, overrides=overrides)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.jobs is not None:
        config = replace(config, jobs=args.jobs)
    if args.output is not None:
        config = replace(config, output=args.output)
    records = list(bench.run_case(config))
    bench.emit_csv(records, config.output)
    failures = sum(1 for rec in records if rec.status != "ok")
    print(f"wrote {len(records)} records to {config.output} ({failures} failures)")
    return 0


def _cmd_zeta(args: argparse.Namespace) -> int:
    c_values = _parse_c_range(args.c)
    if not c_values or min(c_values) < 1:
        print("--c values must be positive", file=sys.stderr)
        return 1
    n = args.n if args.n > 0 else (500 if args.problem == "tde" else 100)
    grid = SamplingGrid(N=n, Ts=2e-8)
    rows = []
    for c in c_values:
        report = compute_zeta(args.problem, grid, c, n_samples=args.samples)
        rows.append(
            [
                args.problem,
                str(c),
                repr(report.zeta),
                repr(report.bomp_max_error),
                repr(report.b_worst),
                str(report.samples),
            ]
        )
    if args.output is None:
        print(ZETA_HEADER)
        for row in rows:
            print(",".join(row))
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ZETA_HEADER.split(","))
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.output}")
    return 0


def _cmd_spark(args: argparse.Namespace) -> int:
    n = args.n if args.n > 0 else (500 if args.problem == "tde" else 100)
    spec = PulseSpec()
    grid = SamplingGrid(N=n, Ts=2e-8)
    dictionary = build_dictionary(args.problem, spec, grid, args.c)
    probes = min(args.probes, dictionary.P)
    if probes < 1:
        print("--probes must be positive", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    probe_indices = np.sort(rng.choice(dictionary.P, size=probes, replace=False))
    diagnostics: dict = {}
    bound = spark_bound(
        dictionary, mode=args.mode, probe_indices=probe_indices, diagnostics=diagnostics
    )
    infeasible = diagnostics.get("infeasible_probes", 0)
    failed = len(diagnostics.get("failures", []))
    feasible = probes - infeasible - failed
    note = "every probe infeasible; bound is N" if diagnostics.get("all_infeasible") else ""
    print(
        f"{args.problem} dictionary, N={n}, c={args.c}, P={dictionary.P}: "
        f"spark upper bound {bound} "
        f"({feasible}/{probes} probes feasible, mode={args.mode})"
        + (f"  [{note}]" if note else "")
    )
    return 0


def _cmd_lambda_sweep(args: argparse.Namespace) -> int:
    lambdas = tuple(float(v) for v in args.lambdas.split(",") if v.strip())
    kappas = tuple(float(v) for v in args.kappas.split(",") if v.strip())
    snrs = tuple(float(v) for v in args.snrs.split(",") if v.strip())
    if not lambdas or not kappas or not snrs:
        print("empty sweep grid", file=sys.stderr)
        return 1
    spec = PulseSpec()
    grid = SamplingGrid(N=args.n, Ts=2e-8)
    cells = lambda_sweep(
        lambdas,
        kappas,
        snrs,
        trials=args.trials,
        spec=spec,
        grid=grid,
        c=args.c,
        seed=args.seed,
    )
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(bench.CSV_HEADER.split(","))
        seen_ref = set()
        for cell in cells:
            status = f"mean-of-{cell.trials}"
            if cell.failures:
                status += f";failures={cell.failures}"
            writer.writerow(
                [
                    "L",
                    f"ccbp(lam={cell.lam:g})",
                    repr(cell.kappa),
                    repr(cell.snr),
                    "-1",
                    repr(cell.b_mse_us2),
                    "nan",
                    "nan",
                    status,
                ]
            )
            # One BOMP reference row per (kappa, snr) cell.
            key = (cell.kappa, cell.snr)
            if key not in seen_ref:
                seen_ref.add(key)
                writer.writerow(
                    [
                        "L",
                        "bomp",
                        repr(cell.kappa),
                        repr(cell.snr),
                        "-1",
                        repr(cell.bomp_b_mse_us2),
                        "nan",
                        "nan",
                        f"mean-of-{cell.trials}",
                    ]
                )
    print(f"wrote {len(cells)} sweep cells to {args.output}")
    return 0


def _cmd_gen_config(args: argparse.Namespace) -> int:
    bench.write_default_config(args.output)
    print(f"wrote default config to {args.output}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "zeta": _cmd_zeta,
    "spark": _cmd_spark,
    "lambda-sweep": _cmd_lambda_sweep,
    "gen-config": _cmd_gen_config,
}


def main(argv: "list[str] | None" = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
