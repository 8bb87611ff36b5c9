#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Fixed point iterations beta <- beta - eta^t op(beta) for the VI operator and
the MLE gradient, the streaming stochastic approximation update and step size
schedules.

Schedules:

    from glmvi.estimation.solvers import constant, theoretical_fp, robbins_monro
    theoretical_fp(mu=1, lipschitz=1, d=1, M=1).step(0)  # 0.25
    robbins_monro(mu=2).step(0)  # 0.5

The experiment schedule eta0 sqrt(N / d) decay_rate^k needs the data size:

    schedule = parse_schedule("decay:eta0=0.01,rate=0.975", N=100, d=10)

Runs stop after exactly T iterations unless `stop_tol` is positive. An iterate
with a non finite entry or a norm above `DIVERGENCE_NORM` raises a
DivergenceError carrying the trace up to the last finite iterate.
"""

# Third party modules
import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Optional
import numpy as np
import pandas
from scipy import optimize

# Internal modules
from glmvi.common.errors import (
    DivergenceError,
    DomainError,
    NotConvergedError,
    ParameterError,
)
from glmvi.common.linalg import min_singular_value
from glmvi.glm.families import vi_sample_op
from glmvi.glm.operators import empirical_mle_grad, empirical_vi, vi_jacobian

DIVERGENCE_NORM = 1e8
# Acceptance of an exact solution: |V_N(beta)| <= tol (1 + |beta|)
CONVERGENCE_TOL = 1e-8
# Base step and decay of the experiment schedule
ETA0 = 0.01
DECAY_RATE = 0.975
# Maximum number of iterates kept by the stochastic approximation
MAX_RECORDED = 10_000

logger = logging.getLogger("glmvi.estimation")


@dataclass(frozen=True)
class StepSchedule:
    """Step size eta^t as a function of the iteration counter t

    Create instances with `constant`, `theoretical_fp`, `robbins_monro` or
    `experiment_decay`.
    """

    kind: str
    eta: Optional[float] = None
    mu: Optional[float] = None
    lipschitz: Optional[float] = None
    d: Optional[int] = None
    M: Optional[float] = None
    eta0: Optional[float] = None
    scale: Optional[float] = None
    decay_rate: Optional[float] = None

    def __post_init__(self):
        required = {
            "constant": ("eta",),
            "theoretical_fp": ("mu", "lipschitz", "d", "M"),
            "robbins_monro": ("mu",),
            "experiment_decay": ("eta0", "decay_rate"),
        }
        if self.kind not in required:
            raise ParameterError(f"Unknown schedule kind {self.kind}")
        for name in required[self.kind]:
            value = getattr(self, name)
            if value is None or not value > 0 or not math.isfinite(value):
                raise ParameterError(
                    f"Schedule {self.kind} needs a positive finite {name}, got {value}"
                )
        if self.scale is not None and not self.scale > 0:
            raise ParameterError(f"Schedule scale must be positive, got {self.scale}")

    def with_scale(self, N, d):
        """Experiment schedule scaled by sqrt(N / d), other kinds unchanged"""
        if self.kind != "experiment_decay":
            return self
        return replace(self, scale=math.sqrt(N / d))

    def step(self, t):
        """Step size at iteration t (starting at 0)"""
        if self.kind == "constant":
            return self.eta
        if self.kind == "theoretical_fp":
            return self.mu / (self.lipschitz**2 * (1 + self.d * self.M**2) ** 2)
        if self.kind == "robbins_monro":
            return 1 / (self.mu * (t + 1))
        if self.scale is None:
            raise ParameterError("experiment_decay needs a scale, see with_scale()")
        return self.eta0 * self.scale * self.decay_rate**t

    def contraction_factor(self):
        """Squared error contraction per step of the theoretical schedule"""
        if self.kind != "theoretical_fp":
            raise ParameterError("Only theoretical_fp schedules have a contraction factor")
        return 1 - self.mu**2 / (self.lipschitz**2 * (1 + self.d * self.M**2) ** 2)


def constant(eta):
    return StepSchedule("constant", eta=eta)


def theoretical_fp(mu, lipschitz, d, M):
    """Constant step mu / (L^2 (1 + d M^2)^2) with linear convergence"""
    return StepSchedule("theoretical_fp", mu=mu, lipschitz=lipschitz, d=d, M=M)


def robbins_monro(mu):
    """Diminishing step 1 / (mu (t + 1))"""
    return StepSchedule("robbins_monro", mu=mu)


def experiment_decay(eta0=ETA0, decay_rate=DECAY_RATE, scale=None):
    """Exponentially decaying step eta0 scale decay_rate^k"""
    return StepSchedule("experiment_decay", eta0=eta0, decay_rate=decay_rate, scale=scale)


def _parse_args(text, spec):
    values = {}
    for item in filter(None, text.split(",")):
        key, _, value = item.partition("=")
        try:
            values[key.strip()] = float(value)
        except ValueError:
            raise ParameterError(f"Malformed value in schedule spec '{spec}'")
    return values


def parse_schedule(spec, N=None, d=None, link=None, data=None):
    """Schedule from its command line specification

    Accepted forms: `theoretical`, `constant:eta=..`, `rm:mu=..`,
    `decay:eta0=..,rate=..`. The theoretical step needs the link and the
    data to compute mu (the averaged Minty modulus), L and M. The decay schedule is
    scaled by sqrt(N / d) when N and d are known (taken from the data when
    given).
    """
    kind, _, args = spec.strip().partition(":")
    values = _parse_args(args, spec)
    if data is not None:
        N, d = data.N, data.d
    if kind == "constant":
        return constant(values.get("eta", ETA0))
    if kind == "rm":
        if "mu" not in values:
            raise ParameterError(f"Schedule '{spec}' needs mu")
        return robbins_monro(values["mu"])
    if kind == "decay":
        schedule = experiment_decay(values.get("eta0", ETA0), values.get("rate", DECAY_RATE))
        # Without data size, an unscaled template filled later by with_scale
        if N is None or d is None:
            return schedule
        return schedule.with_scale(N, d)
    if kind == "theoretical":
        if link is None or data is None:
            raise ParameterError("The theoretical schedule needs the link and the data")
        if link.monotone_modulus is None or not math.isfinite(link.lipschitz):
            raise ParameterError(
                f"The theoretical schedule needs known mu_g and L, link {link.kind}"
            )
        mu = link.monotone_modulus * min_singular_value(data.design) ** 2 / data.N
        return theoretical_fp(mu, link.lipschitz, max(data.d, 1), max(data.M, 1.0))
    raise ParameterError(f"Unknown schedule specification '{spec}'")


@dataclass
class SolverTrace:
    """History of a solver run

    :param (array) iterates, (K, p) recorded iterates, first row is beta0
    :param (array) operator_norms, (K,) norm of the operator at each iterate
    :param (array) errors_to_target, (K,) squared distance to beta_star or None
    :param (int) wall_iterations, number of updates performed
    :param (int) stride, iterations between recorded iterates
    """

    iterates: np.ndarray
    operator_norms: np.ndarray
    errors_to_target: Optional[np.ndarray] = None
    wall_iterations: int = 0
    stride: int = 1
    truncated: bool = False
    diverged: bool = False
    steps: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.steps is None:
            self.steps = np.arange(len(self.iterates)) * self.stride

    @property
    def final(self):
        return self.iterates[-1]

    def to_frame(self):
        """One row per recorded iterate: k, beta_j, op_norm and err"""
        df = pandas.DataFrame(
            self.iterates, columns=[f"beta_{j}" for j in range(self.iterates.shape[1])]
        )
        df.insert(0, "k", self.steps)
        df["op_norm"] = self.operator_norms
        if self.errors_to_target is not None:
            df["err"] = self.errors_to_target
        return df


def _make_trace(iterates, norms, beta_star, wall_iterations, **kwargs):
    iterates = np.array(iterates)
    errors = None
    if beta_star is not None:
        errors = ((iterates - beta_star) ** 2).sum(axis=1)
    return SolverTrace(iterates, np.array(norms), errors, wall_iterations, **kwargs)


def _is_diverged(beta):
    return not np.all(np.isfinite(beta)) or np.linalg.norm(beta) > DIVERGENCE_NORM


def fixed_point_solve(op, beta0, schedule, T, stop_tol=0.0, beta_star=None):
    """Run beta^{t+1} = beta^t - eta^t op(beta^t)

    :param (callable) op, maps a parameter vector to a vector of the same size
    :param (array) beta0, initialization
    :param (StepSchedule) schedule
    :param (int) T, maximum number of iterations
    :param (float) stop_tol, stop when |op(beta^t)| <= stop_tol (0 runs T steps)
    :param (array) beta_star, target used for the squared errors
    :return (SolverTrace)
    :raise DivergenceError with the trace of the finite iterates
    """
    if T < 1:
        raise ParameterError(f"T must be at least 1, got {T}")
    beta = np.array(beta0, dtype=float)
    iterates, norms = [beta.copy()], []
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            try:
                value = np.asarray(op(beta))
            except DomainError as error:
                trace = _make_trace(iterates, norms + [np.nan], beta_star, t, diverged=True)
                logger.warning("Operator left its domain at iteration %s: %s", t, error)
                raise DivergenceError(f"Operator undefined at iteration {t}", trace)
            norms.append(float(np.linalg.norm(value)))
            if stop_tol > 0 and norms[-1] <= stop_tol:
                return _make_trace(iterates, norms, beta_star, t)
            beta = beta - schedule.step(t) * value
            if _is_diverged(beta):
                trace = _make_trace(iterates, norms, beta_star, t, diverged=True)
                logger.warning("Fixed point iterates diverged at iteration %s", t + 1)
                raise DivergenceError(f"Iterates diverged at iteration {t + 1}", trace)
            iterates.append(beta.copy())
        try:
            norms.append(float(np.linalg.norm(op(beta))))
        except DomainError:
            norms.append(np.nan)
    return _make_trace(iterates, norms, beta_star, T)


def vi_fixed_point(link, data, beta0, schedule, T, stop_tol=0.0, beta_star=None):
    """Fixed point iterations on the empirical VI operator"""
    op = partial(empirical_vi, link, data)
    return fixed_point_solve(op, beta0, schedule, T, stop_tol, beta_star)


def mle_gd_solve(family, link, data, beta0, schedule, T, stop_tol=0.0, beta_star=None):
    """Gradient descent on the mean negative log-likelihood"""
    op = partial(empirical_mle_grad, family, link, data)
    return fixed_point_solve(op, beta0, schedule, T, stop_tol, beta_star)


def stochastic_approx(link, stream, beta0, mu, T, intercept=False, beta_star=None, stride=None):
    """Streaming update beta^{t+1} = beta^t - V_(x^t, y^t)(beta^t) / (mu (t + 1))

    :param (LinkFunction) link
    :param (iterator) stream, yields Observation objects
    :param (array) beta0
    :param (float) mu, strong Minty modulus of the population operator
    :param (int) T, number of updates
    :param (bool) intercept, augment each x with a leading one
    :param (array) beta_star, target used for the squared errors
    :param (int) stride, record every stride-th iterate; by default at most
        MAX_RECORDED iterates are kept. The last iterate is always recorded.
    :return (SolverTrace) with truncated=True when the stream ran out
    """
    schedule = robbins_monro(mu)
    if stride is None:
        stride = max(1, math.ceil(T / MAX_RECORDED))
    beta = np.array(beta0, dtype=float)
    iterates, norms, steps = [beta.copy()], [], [0]
    truncated = False
    t = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            try:
                obs = next(stream)
            except StopIteration:
                truncated = True
                logger.warning("Observation stream exhausted after %s updates", t)
                break
            value = vi_sample_op(link, obs, beta, intercept)
            if steps[-1] == t:
                norms.append(float(np.linalg.norm(value)))
            beta = beta - schedule.step(t) * value
            if _is_diverged(beta):
                trace = _make_trace(iterates, norms, beta_star, t, stride=stride, diverged=True,
                                    steps=np.array(steps))
                raise DivergenceError(f"Iterates diverged at update {t + 1}", trace)
            if (t + 1) % stride == 0 or t + 1 == T:
                iterates.append(beta.copy())
                steps.append(t + 1)
        else:
            t = T
    # The operator at the last recorded iterate was not evaluated
    norms.extend([np.nan] * (len(iterates) - len(norms)))
    return _make_trace(iterates, norms, beta_star, t, stride=stride, truncated=truncated,
                       steps=np.array(steps))


def residual_ok(link, data, beta, tol=CONVERGENCE_TOL):
    """True if |V_N(beta)| <= tol (1 + |beta|)"""
    with np.errstate(over="ignore", invalid="ignore"):
        value = empirical_vi(link, data, beta)
    return bool(np.linalg.norm(value) <= tol * (1 + np.linalg.norm(beta)))


def solve_vi(link, data, beta0=None, tol=CONVERGENCE_TOL, max_iter=10_000):
    """Zero of the empirical VI operator

    Newton type root finding (scipy hybr) with the analytic Jacobian, falling
    back to fixed point iterations with step 1 / (largest Jacobian
    eigenvalue) when the root finder fails.

    :return (array) beta_hat with |V_N(beta_hat)| <= tol (1 + |beta_hat|)
    :raise NotConvergedError
    """
    beta = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
    op = partial(empirical_vi, link, data)
    jac = partial(vi_jacobian, link, data)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            solution = optimize.root(op, beta, jac=jac, method="hybr", options={"xtol": 1e-14})
        if np.all(np.isfinite(solution.x)) and residual_ok(link, data, solution.x, tol):
            return solution.x
        logger.debug("Root finder did not reach the tolerance: %s", solution.message)
    except (DomainError, ArithmeticError, ValueError) as error:
        logger.debug("Root finder failed: %s", error)
    # Fallback on fixed point iterations
    top = np.linalg.eigvalsh(jac(beta)).max()
    if not top > 0:
        top = np.linalg.eigvalsh(data.design.T @ data.design / data.N).max()
    try:
        trace = fixed_point_solve(
            op, beta, constant(1 / top), max_iter, stop_tol=tol * (1 + np.linalg.norm(beta)) / 10
        )
    except DivergenceError as error:
        raise NotConvergedError(f"VI solve diverged for link {link.kind}") from error
    if not residual_ok(link, data, trace.final, tol):
        raise NotConvergedError(
            f"VI solve for link {link.kind} stopped at |V_N| = {trace.operator_norms[-1]:.3e}"
        )
    return trace.final
