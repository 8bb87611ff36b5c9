#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Monte Carlo benchmark comparing the VI fixed point iterations to MLE gradient
descent on simulated data. Each replication draws one dataset and runs both
methods from beta0 = 0 with the same step schedule. The squared error
|beta^k - beta_star|^2 is averaged over replications.

Run one cell of the grid:

    from glmvi.glm.links import softplus
    from glmvi.estimation.solvers import experiment_decay
    from glmvi.experiment.bench import run_cell
    cell = run_cell(softplus(), d=10, N=100, k=20, reps=200, schedule=experiment_decay())
    cell.mean_sq_error_vi, cell.mean_sq_error_mle

Run a grid and save the table, one row per cell and method:

    from glmvi.experiment.bench import GridSpec, run_grid, desk_grid
    df = run_grid(desk_grid(), multi_process=True)
    df.to_csv("softplus.csv", index=False)

Trajectories of both methods on a single dataset:

    from glmvi.experiment.bench import trajectory_run, trajectory_frame
    vi_trace, mle_trace = trajectory_run(softplus(), 20, 400, experiment_decay(), seed=1, T=200)
    trajectory_frame(vi_trace, mle_trace, T=200)

Replications that diverge (or whose MLE mean leaves the loss domain) are
excluded from the means and counted in the `diverged` column.
"""

# Third party modules
import json
import logging
import zlib
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Tuple
import numpy as np
import pandas
import pymannkendall as mk

# Internal modules
from glmvi.common.errors import DivergenceError, ParameterError
from glmvi.estimation.solvers import (
    StepSchedule,
    experiment_decay,
    mle_gd_solve,
    parse_schedule,
    vi_fixed_point,
)
from glmvi.experiment.synth import ExperimentConfig, beta_star_vector, generate
from glmvi.glm.families import Family, parse_family, poisson
from glmvi.glm.links import clipped_exp, exp_link, gmm_cdf, link_spec, parse_link, softplus

COLUMNS = ["link", "d", "N", "k", "method", "mean", "sd", "reps", "diverged"]
METHODS = ("mle", "vi")

logger = logging.getLogger("glmvi.experiment")


@dataclass(frozen=True)
class GridSpec:
    """Benchmark grid

    :param (tuple) links, LinkFunction objects
    :param (tuple) dims, numbers of covariates d
    :param (tuple) sample_sizes, numbers of observations N
    :param (tuple) iter_budgets, iteration budgets k
    :param (int) reps, replications per cell
    :param (str) beta_star, "dense" or "sparse"
    :param (StepSchedule) schedule, scaled by sqrt(N / d) in each cell when
        it is an experiment decay schedule
    :param (int) base_seed
    :param (Family) family
    """

    links: Tuple
    dims: Tuple[int, ...]
    sample_sizes: Tuple[int, ...]
    iter_budgets: Tuple[int, ...]
    reps: int
    beta_star: str = "dense"
    schedule: StepSchedule = field(default_factory=experiment_decay)
    base_seed: int = 0
    family: Family = field(default_factory=poisson)

    def __post_init__(self):
        for name in ("links", "dims", "sample_sizes", "iter_budgets"):
            value = tuple(getattr(self, name))
            if not value:
                raise ParameterError(f"Grid {name} must not be empty")
            object.__setattr__(self, name, value)
        if self.reps < 1:
            raise ParameterError(f"reps must be at least 1, got {self.reps}")
        if min(self.iter_budgets) < 1 or min(self.dims) < 1 or min(self.sample_sizes) < 1:
            raise ParameterError("Dimensions, sample sizes and budgets must be positive")
        if self.beta_star not in ("dense", "sparse"):
            raise ParameterError(f"beta_star must be dense or sparse, got {self.beta_star}")

    @classmethod
    def from_dict(cls, spec):
        """Grid from a JSON like dictionary

        Keys: links (link specifications), dims, sample_sizes, iter_budgets,
        reps, and optionally beta_star, schedule (specification string),
        base_seed, family.
        """
        try:
            return cls(
                links=tuple(parse_link(link) for link in spec["links"]),
                dims=tuple(int(d) for d in spec["dims"]),
                sample_sizes=tuple(int(n) for n in spec["sample_sizes"]),
                iter_budgets=tuple(int(k) for k in spec["iter_budgets"]),
                reps=int(spec["reps"]),
                beta_star=spec.get("beta_star", "dense"),
                schedule=parse_schedule(spec.get("schedule", "decay")),
                base_seed=int(spec.get("base_seed", 0)),
                family=parse_family(spec.get("family", "poisson")),
            )
        except KeyError as error:
            raise ParameterError(f"Grid specification misses the key {error}")

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


@dataclass(frozen=True)
class CellResult:
    """Squared error statistics of both methods in one grid cell"""

    link: str
    d: int
    N: int
    k: int
    mean_sq_error_vi: float
    sd_vi: float
    mean_sq_error_mle: float
    sd_mle: float
    diverged_vi: int
    diverged_mle: int
    reps: int

    def to_rows(self):
        """Rows of the result table, one per method"""
        base = {"link": self.link, "d": self.d, "N": self.N, "k": self.k}
        return [
            dict(base, method="mle", mean=self.mean_sq_error_mle, sd=self.sd_mle,
                 reps=self.reps, diverged=self.diverged_mle),
            dict(base, method="vi", mean=self.mean_sq_error_vi, sd=self.sd_vi,
                 reps=self.reps, diverged=self.diverged_vi),
        ]


def cell_seed(base_seed, link, d, N):
    """Seed of a grid cell derived from its coordinates

    Cells sharing (link, d, N) share their datasets across iteration budgets.
    """
    key = zlib.crc32(link_spec(link).encode("utf-8"))
    sequence = np.random.SeedSequence(entropy=base_seed, spawn_key=(key, d, N))
    return int(sequence.generate_state(1)[0])


def _errors_at(trace_errors, budgets):
    """Squared errors at each budget, NaN past the last finite iterate"""
    return [trace_errors[k] if k < len(trace_errors) else np.nan for k in budgets]


def replication_errors(family, link, d, N, budgets, schedule, beta_star, seed):
    """Squared errors of both methods at each budget for one replication

    :return (dict) method -> list of squared errors, NaN when diverged
    """
    config = ExperimentConfig(d, N, link, family, beta_star, seed=seed)
    data = generate(config)
    target = beta_star_vector(config)
    beta0 = np.zeros(data.p)
    schedule = schedule.with_scale(N, d)
    T = max(budgets)
    solvers = {
        "vi": partial(vi_fixed_point, link, data),
        "mle": partial(mle_gd_solve, family, link, data),
    }
    errors = {}
    for method, solver in solvers.items():
        try:
            trace = solver(beta0, schedule, T, beta_star=target)
        except DivergenceError as error:
            trace = error.trace
        errors[method] = _errors_at(trace.errors_to_target, budgets)
    return errors


def _summary(values):
    values = np.asarray(values, dtype=float)
    kept = values[np.isfinite(values)]
    if kept.size == 0:
        return np.nan, np.nan, int(values.size)
    sd = float(kept.std(ddof=1)) if kept.size > 1 else 0.0
    return float(kept.mean()), sd, int(values.size - kept.size)


def run_block(link, d, N, budgets, reps, schedule, beta_star="dense", base_seed=0,
              family=None, multi_process=False):
    """Cells sharing (link, d, N) for several budgets, from the same runs

    Replication r uses the seed base_seed + r.

    :return (list) CellResult, one per budget
    """
    family = poisson() if family is None else family
    func = partial(replication_errors, family, link, d, N, tuple(budgets), schedule, beta_star)
    seeds = [base_seed + r for r in range(reps)]
    if multi_process:
        with Pool(None if multi_process is True else multi_process) as pool:
            results = pool.map(func, seeds)
    else:
        results = [func(seed) for seed in seeds]
    cells = []
    for i, k in enumerate(budgets):
        mean_vi, sd_vi, div_vi = _summary([result["vi"][i] for result in results])
        mean_mle, sd_mle, div_mle = _summary([result["mle"][i] for result in results])
        if div_vi or div_mle:
            logger.info(
                "%s d=%s N=%s k=%s: excluded %s VI and %s MLE diverged replication(s)",
                link_spec(link), d, N, k, div_vi, div_mle,
            )
        cells.append(
            CellResult(link_spec(link), d, N, k, mean_vi, sd_vi, mean_mle, sd_mle,
                       div_vi, div_mle, reps)
        )
    return cells


def run_cell(link, d, N, k, reps, schedule, beta_star="dense", base_seed=0,
             family=None, multi_process=False):
    """Squared error statistics of VI and MLE after k iterations

    :param (LinkFunction) link
    :param (int) d, N, k, reps
    :param (StepSchedule) schedule
    :param (str) beta_star, "dense" or "sparse"
    :param (int) base_seed, replication r uses base_seed + r
    :param (Family) family, poisson by default
    :param multi_process, True runs replications on all cores, an integer on
        that many processes
    :return (CellResult)
    """
    return run_block(link, d, N, (k,), reps, schedule, beta_star, base_seed,
                     family, multi_process)[0]


def results_frame(cells):
    """Result table sorted by link, d, N, k and method"""
    rows = [row for cell in cells for row in cell.to_rows()]
    df = pandas.DataFrame(rows, columns=COLUMNS)
    return df.sort_values(["link", "d", "N", "k", "method"]).reset_index(drop=True)


def run_grid(spec, multi_process=False):
    """Run every cell of a grid

    :param (GridSpec) spec
    :param multi_process, True runs replications on all cores, an integer on
        that many processes
    :return (DataFrame) columns link, d, N, k, method, mean, sd, reps, diverged
    """
    cells = []
    blocks = [(link, d, N) for link in spec.links for d in spec.dims for N in spec.sample_sizes]
    budgets = sorted(set(spec.iter_budgets))
    for i, (link, d, N) in enumerate(blocks):
        logger.info("Block %s/%s: link %s, d=%s, N=%s", i + 1, len(blocks), link_spec(link), d, N)
        seed = cell_seed(spec.base_seed, link, d, N)
        cells += run_block(link, d, N, budgets, spec.reps, spec.schedule, spec.beta_star,
                           seed, spec.family, multi_process)
    return results_frame(cells)


def error_curve(link, d, N, schedule, reps, T, base_seed=0, family=None, multi_process=False):
    """Mean squared error of both methods against the iteration budget

    :return (DataFrame) columns k, mean_vi, mean_mle, diverged_vi, diverged_mle
    """
    cells = run_block(link, d, N, range(1, T + 1), reps, schedule, "dense", base_seed,
                      family, multi_process)
    return pandas.DataFrame(
        {
            "k": [cell.k for cell in cells],
            "mean_vi": [cell.mean_sq_error_vi for cell in cells],
            "mean_mle": [cell.mean_sq_error_mle for cell in cells],
            "diverged_vi": [cell.diverged_vi for cell in cells],
            "diverged_mle": [cell.diverged_mle for cell in cells],
        }
    )


def trajectory_run(link, d, N, schedule, seed, T, family=None, beta_star="dense"):
    """Full traces of both methods on one dataset from beta0 = 0

    :return (tuple) vi_trace, mle_trace. A diverged trace stops at its last
        finite iterate and has diverged=True.
    """
    family = poisson() if family is None else family
    config = ExperimentConfig(d, N, link, family, beta_star, seed=seed)
    data = generate(config)
    target = beta_star_vector(config)
    schedule = schedule.with_scale(N, d)
    traces = []
    for solver in (partial(vi_fixed_point, link, data), partial(mle_gd_solve, family, link, data)):
        try:
            traces.append(solver(np.zeros(data.p), schedule, T, beta_star=target))
        except DivergenceError as error:
            traces.append(error.trace)
    return tuple(traces)


def trajectory_frame(vi_trace, mle_trace, T):
    """Aligned squared errors, columns k, err_vi, err_mle, NaN after divergence"""
    df = pandas.DataFrame({"k": np.arange(T + 1)})
    for name, trace in (("err_vi", vi_trace), ("err_mle", mle_trace)):
        errors = np.full(T + 1, np.nan)
        errors[: len(trace.errors_to_target)] = trace.errors_to_target
        df[name] = errors
    return df


def trend_report(df, columns=("err_vi", "err_mle"), alpha=0.05):
    """Mann-Kendall trend test of trajectory columns

    :param (DataFrame) df, output of `trajectory_frame` or `error_curve`
    :return (DataFrame) one row per column: trend, h, p-value, Sen slope
    """
    rows = []
    for column in columns:
        values = df[column].dropna().to_numpy()
        if len(values) < 3:
            rows.append({"column": column, "trend": "too short", "h": False,
                         "mk_pvalue": np.nan, "sen_slope": np.nan})
            continue
        mk_results = mk.original_test(values, alpha)
        rows.append({"column": column, "trend": mk_results.trend, "h": mk_results.h,
                     "mk_pvalue": mk_results.p, "sen_slope": mk_results.slope})
    return pandas.DataFrame(rows)


def desk_grid(link=None, reps=200, base_seed=0):
    """Softplus grid d in {10, 20}, N in {100, 1000}, k in {20, 50, 100, 200}"""
    link = softplus() if link is None else link
    return GridSpec((link,), (10, 20), (100, 1000), (20, 50, 100, 200), reps,
                    base_seed=base_seed)


def full_grid(beta_star="dense", reps=1000, base_seed=0):
    """Full grid: four links, d in 10..100, N in 100..1000, 1000 replications"""
    links = (softplus(), exp_link(), clipped_exp(0, 2), gmm_cdf())
    return GridSpec(
        links,
        tuple(range(10, 101, 10)),
        tuple(range(100, 1001, 100)),
        (20, 50, 100, 200),
        reps,
        beta_star=beta_star,
        base_seed=base_seed,
    )
