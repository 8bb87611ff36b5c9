#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Command line interface of glmvi.

Generate a dataset, fit it with both methods and check the Minty condition:

    glmvi generate --link softplus --family poisson --d 10 --N 100 --seed 1 --out data.csv
    glmvi fit --method vi --link softplus --data data.csv --schedule decay:eta0=0.01,rate=0.975 --iters 200
    glmvi minty-check --link minty_sine --data data.csv

Coverage of the sandwich confidence intervals:

    glmvi covcheck --link softplus --family poisson --d 2 --N 2000 --reps 500 --threads 4

Benchmark grid and trajectories:

    glmvi benchmark --grid grid.json --out table.csv --threads 8
    glmvi benchmark --full-grid --out full_table.csv
    glmvi trajectory --link clipped_exp:c=0,C=2 --d 20 --N 400 --iters 200 --out traj.csv

Exit codes: 0 on completion, 1 when a computation fails, 2 on a
configuration error.
"""

# Third party modules
import argparse
import json
import logging
import sys
import numpy as np
import pandas

# Internal modules
from glmvi.common.errors import GlmviError, ParameterError
from glmvi.common.logger import create_logger
from glmvi.estimation.inference import normality_check
from glmvi.estimation.solvers import (
    DECAY_RATE,
    ETA0,
    mle_gd_solve,
    parse_schedule,
    vi_fixed_point,
)
from glmvi.experiment import experiment
from glmvi.experiment.bench import (
    GridSpec,
    error_curve,
    full_grid,
    run_grid,
    trajectory_frame,
    trajectory_run,
    trend_report,
)
from glmvi.experiment.synth import ExperimentConfig, generate, write_dataset
from glmvi.glm.families import check_observation, parse_family
from glmvi.glm.links import parse_link
from glmvi.glm.operators import Dataset, minty_lemma1

logger = logging.getLogger("glmvi.cli")


class ConfigError(Exception):
    """Invalid command line configuration, exit code 2"""


def _add_model_arguments(parser, data=True):
    parser.add_argument("--link", default="softplus", help="Link specification, e.g. softplus, log, clipped_exp:c=0,C=2")
    parser.add_argument("--family", default="poisson", help="gaussian, bernoulli, poisson or exponential")
    parser.add_argument("--d", type=int, default=10, help="Number of covariates")
    parser.add_argument("--N", type=int, default=100, help="Number of observations")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--beta-star", default="dense", choices=["dense", "sparse"])
    parser.add_argument("--intercept", action="store_true", help="Model with an intercept")
    if data:
        parser.add_argument("--data", help="CSV file with x_1..x_d and y columns, generated when absent")


def build_parser():
    parser = argparse.ArgumentParser(prog="glmvi", description="VI estimation of generalized linear models")
    subparsers = parser.add_subparsers(dest="command", required=True)

    generate_parser = subparsers.add_parser("generate", help="Write a synthetic dataset as CSV")
    _add_model_arguments(generate_parser, data=False)
    generate_parser.add_argument("--out", required=True, help="CSV path, a JSON sidecar is written next to it")

    fit_parser = subparsers.add_parser("fit", help="Fit by VI fixed point or MLE gradient descent")
    _add_model_arguments(fit_parser)
    fit_parser.add_argument("--method", choices=["vi", "mle"], default="vi")
    fit_parser.add_argument("--schedule", default=f"decay:eta0={ETA0},rate={DECAY_RATE}",
                            help="theoretical, constant:eta=.., rm:mu=.. or decay:eta0=..,rate=..")
    fit_parser.add_argument("--iters", type=int, default=200)
    fit_parser.add_argument("--stop-tol", type=float, default=0.0)
    fit_parser.add_argument("--trace", help="CSV path of the full trace, one row per iterate")

    minty_parser = subparsers.add_parser("minty-check", help="Minty condition diagnostics as JSON")
    _add_model_arguments(minty_parser)

    covcheck_parser = subparsers.add_parser("covcheck", help="Coverage of sandwich Wald intervals as JSON")
    _add_model_arguments(covcheck_parser, data=False)
    covcheck_parser.add_argument("--reps", type=int, default=500)
    covcheck_parser.add_argument("--threads", type=int, default=1)

    bench_parser = subparsers.add_parser("benchmark", help="Monte Carlo grid of VI against MLE")
    bench_parser.add_argument("--grid", help="JSON grid specification")
    bench_parser.add_argument("--full-grid", action="store_true", help="Full grid, long running")
    bench_parser.add_argument("--out", required=True, help="CSV path or file name in the data directory")
    bench_parser.add_argument("--reps", type=int, help="Override the grid replications")
    bench_parser.add_argument("--threads", type=int, default=1)

    traj_parser = subparsers.add_parser("trajectory", help="Squared error trajectories of both methods")
    _add_model_arguments(traj_parser, data=False)
    traj_parser.add_argument("--schedule", default=f"decay:eta0={ETA0},rate={DECAY_RATE}")
    traj_parser.add_argument("--iters", type=int, default=200)
    traj_parser.add_argument("--reps", type=int, default=1, help="Above 1, mean errors over replications")
    traj_parser.add_argument("--trend", action="store_true", help="Log a Mann-Kendall trend test of both columns")
    traj_parser.add_argument("--out", required=True)
    return parser


def _multi_process(threads):
    return threads if threads > 1 else False


def _config(args):
    try:
        return ExperimentConfig(
            d=args.d,
            N=args.N,
            link=parse_link(args.link),
            family=parse_family(args.family),
            beta_star=args.beta_star,
            intercept=args.intercept,
            seed=args.seed,
        )
    except ValueError as error:
        raise ConfigError(str(error))


def _dataset(args, config):
    if not args.data:
        return generate(config)
    try:
        df = pandas.read_csv(args.data)
        data = Dataset.from_frame(df, intercept=args.intercept)
        for obs in data.observations:
            check_observation(config.family, obs)
        return data
    except (OSError, ValueError) as error:
        raise ConfigError(f"Cannot read {args.data}: {error}")


def cmd_generate(args):
    config = _config(args)
    write_dataset(generate(config), config, args.out)


def cmd_fit(args):
    config = _config(args)
    data = _dataset(args, config)
    try:
        schedule = parse_schedule(args.schedule, link=config.link, data=data)
    except ParameterError as error:
        raise ConfigError(str(error))
    beta0 = np.zeros(data.p)
    if args.method == "vi":
        trace = vi_fixed_point(config.link, data, beta0, schedule, args.iters, args.stop_tol)
    else:
        trace = mle_gd_solve(config.family, config.link, data, beta0, schedule, args.iters, args.stop_tol)
    final = pandas.DataFrame([trace.final], columns=[f"beta_{j}" for j in range(data.p)])
    final.to_csv(sys.stdout, index=False)
    if args.trace:
        experiment.save_table(trace.to_frame(), args.trace)


def cmd_minty_check(args):
    config = _config(args)
    data = _dataset(args, config)
    report = minty_lemma1(config.link, data, seed=args.seed)
    keys = ("sigma_min", "modulus_lemma1", "grid_min_ratio", "satisfied")
    print(json.dumps({key: report.to_dict()[key] for key in keys}, indent=2))


def cmd_covcheck(args):
    config = _config(args)
    if args.reps < 100:
        raise ConfigError("covcheck needs at least 100 replications")
    report = normality_check(config, args.reps, multi_process=_multi_process(args.threads))
    print(json.dumps(report.to_dict(), indent=2))


def cmd_benchmark(args):
    try:
        if args.full_grid:
            spec = full_grid()
        elif args.grid:
            spec = GridSpec.from_json(args.grid)
        else:
            raise ConfigError("benchmark needs --grid or --full-grid")
        if args.reps is not None:
            spec = GridSpec(spec.links, spec.dims, spec.sample_sizes, spec.iter_budgets, args.reps,
                            spec.beta_star, spec.schedule, spec.base_seed, spec.family)
    except (OSError, ValueError) as error:
        raise ConfigError(str(error))
    df = run_grid(spec, multi_process=_multi_process(args.threads))
    experiment.save_table(df, args.out)


def cmd_trajectory(args):
    config = _config(args)
    try:
        schedule = parse_schedule(args.schedule)
    except ParameterError as error:
        raise ConfigError(str(error))
    if args.reps > 1:
        df = error_curve(config.link, config.d, config.N, schedule, args.reps, args.iters,
                         args.seed, config.family)
        columns = ("mean_vi", "mean_mle")
    else:
        traces = trajectory_run(config.link, config.d, config.N, schedule, args.seed,
                                args.iters, config.family, config.beta_star)
        df = trajectory_frame(*traces, args.iters)
        columns = ("err_vi", "err_mle")
    if args.trend:
        logger.info("Trend tests:\n%s", trend_report(df, columns))
    experiment.save_table(df, args.out, config.to_dict())


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "minty-check": cmd_minty_check,
    "covcheck": cmd_covcheck,
    "benchmark": cmd_benchmark,
    "trajectory": cmd_trajectory,
}


def main(argv=None):
    """Entry point of the glmvi console script, returns the exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    create_logger()
    try:
        COMMANDS[args.command](args)
    except ConfigError as error:
        print(f"glmvi: configuration error: {error}", file=sys.stderr)
        return 2
    except GlmviError as error:
        print(f"glmvi: {type(error).__name__}: {error}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
