#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Inference for the VI estimator and the MLE: finite sample error bound,
sandwich covariance estimates and Monte Carlo coverage checks.

The asymptotic covariance of sqrt(N) (beta_hat - beta_star) is
J^-1 Gamma J^-T with J the Jacobian of the operator and Gamma the covariance
of the per observation operator. Compute it at the exact empirical solution:

    from glmvi.estimation.solvers import solve_vi
    from glmvi.estimation.inference import vi_sandwich, mle_sandwich
    beta_hat = solve_vi(link, data)
    vi_sandwich(link, data, beta_hat).sandwich
    mle_sandwich(family, link, data, beta_hat, require_zero=False).sandwich

With `variance="model"` the residual moments are replaced by the model implied
variance Var(y | x). For the MLE the model version is the inverse Fisher
information, the Cramer-Rao bound. The MLE score carries the model variance in
both versions, through the derivative of the loss.

Coverage of Wald intervals over replications of an experiment:

    from glmvi.experiment.synth import ExperimentConfig
    from glmvi.estimation.inference import normality_check
    config = ExperimentConfig(d=2, N=2000, link=softplus(), family=poisson())
    report = normality_check(config, reps=500, multi_process=True)
    report.coverage_per_coord
"""

# Third party modules
import logging
import math
from dataclasses import dataclass, asdict, replace
from functools import partial
from multiprocessing import Pool
import numpy as np
from scipy import stats

# Internal modules
from glmvi.common.errors import (
    DivergenceError,
    DomainError,
    NotConvergedError,
    ParameterError,
    SingularityError,
)
from glmvi.common.linalg import inverse_sqrt_psd, robust_inverse, sandwich, symmetrize
from glmvi.estimation.solvers import CONVERGENCE_TOL, residual_ok, solve_vi
from glmvi.glm.operators import (
    empirical_mle_grad,
    fisher_information,
    gamma_matrix,
    mle_hessian,
    model_gamma,
    score_covariance,
    vi_jacobian,
)

VARIANCES = ("empirical", "model")
# Two sided 95% normal quantile
Z_95 = 1.96

logger = logging.getLogger("glmvi.estimation")


@dataclass(frozen=True)
class CovarianceEstimate:
    """Sandwich covariance jacobian^-1 score_cov jacobian^-T"""

    jacobian: np.ndarray
    score_cov: np.ndarray
    sandwich: np.ndarray
    ridge_used: float = 0.0

    def standard_errors(self, N):
        """Standard errors of beta_hat for a sample of size N"""
        return np.sqrt(np.clip(np.diag(self.sandwich), 0, None) / N)

    def wald_intervals(self, beta_hat, N, z=Z_95):
        """Lower and upper bounds beta_hat -+ z se"""
        half = z * self.standard_errors(N)
        return beta_hat - half, beta_hat + half


def theorem1_bound(R, M, mu, d, N, eps):
    """High probability bound on |beta_hat_N - beta_star|

    (R M / mu) sqrt(2 (d + 1) ln(2 (d + 1) / eps) / N), valid with probability
    at least 1 - eps when |g^-1(z) - y| <= R and |x|_inf <= M.
    """
    if min(R, M, mu, d, N) <= 0 or not 0 < eps < 1:
        raise ParameterError(
            f"Need positive R, M, mu, d, N and eps in (0, 1), got"
            f" R={R}, M={M}, mu={mu}, d={d}, N={N}, eps={eps}"
        )
    return R * M / mu * math.sqrt(2 * (d + 1) * math.log(2 * (d + 1) / eps) / N)


def sa_mse_bound(R, M, mu, d, t, c0=1.0):
    """Mean square error bound c0 (d + 1) R^2 M^2 / (mu^2 (t + 1)) of the
    stochastic approximation after t updates"""
    if min(R, M, mu, c0) <= 0 or d < 0 or t < 0:
        raise ParameterError("Need positive R, M, mu, c0 and non negative d, t")
    return c0 * (d + 1) * R**2 * M**2 / (mu**2 * (t + 1))


def _check_variance(variance):
    if variance not in VARIANCES:
        raise ParameterError(f"variance must be one of {VARIANCES}, got {variance}")


def vi_sandwich(link, data, beta_hat, family=None, variance="empirical", require_zero=True):
    """Sandwich covariance of the VI estimator

    :param (LinkFunction) link
    :param (Dataset) data
    :param (array) beta_hat, zero of the empirical VI operator
    :param (Family) family, needed with variance="model"
    :param (str) variance, "empirical" uses the residuals, "model" uses
        Var(y | x) of the family
    :param (bool) require_zero, refuse a beta_hat that is not a zero of V_N
    :return (CovarianceEstimate)
    """
    _check_variance(variance)
    beta_hat = np.asarray(beta_hat, dtype=float)
    if require_zero and not residual_ok(link, data, beta_hat):
        raise NotConvergedError(
            f"beta_hat is not a zero of V_N within {CONVERGENCE_TOL} (1 + |beta|)"
        )
    jacobian = vi_jacobian(link, data, beta_hat)
    if variance == "model":
        if family is None:
            raise ParameterError("The model variance needs the family")
        score_cov = model_gamma(family, link, data, beta_hat)
    else:
        score_cov = gamma_matrix(link, data, beta_hat)
    matrix, ridge = sandwich(jacobian, score_cov)
    return CovarianceEstimate(jacobian, score_cov, matrix, ridge)


def mle_sandwich(family, link, data, beta_hat, variance="empirical", require_zero=True):
    """Sandwich covariance of the MLE

    With variance="empirical" the bread is the mean observed Hessian of the
    negative log-likelihood and the filling the mean outer product of the
    per observation gradients. With variance="model" both are the Fisher
    information.
    """
    _check_variance(variance)
    beta_hat = np.asarray(beta_hat, dtype=float)
    if require_zero:
        grad = empirical_mle_grad(family, link, data, beta_hat)
        if np.linalg.norm(grad) > CONVERGENCE_TOL * (1 + np.linalg.norm(beta_hat)):
            raise NotConvergedError("beta_hat is not a stationary point of the MLE loss")
    if variance == "model":
        jacobian = fisher_information(family, link, data, beta_hat)
        score_cov = jacobian
    else:
        jacobian = mle_hessian(family, link, data, beta_hat)
        score_cov = score_covariance(family, link, data, beta_hat)
    matrix, ridge = sandwich(jacobian, score_cov)
    return CovarianceEstimate(jacobian, score_cov, matrix, ridge)


def efficiency_gap(family, link, data, beta):
    """Difference of the VI and MLE asymptotic covariances with model moments

    Both covariances are computed from the same sample moments, so the
    difference is positive semi definite up to rounding.

    :return (dict) sigma_vi, sigma_mle, gap and its min_eigenvalue
    """
    sigma_vi = vi_sandwich(link, data, beta, family, "model", require_zero=False).sandwich
    sigma_mle = robust_inverse(fisher_information(family, link, data, beta))
    gap = symmetrize(sigma_vi - sigma_mle)
    return {
        "sigma_vi": sigma_vi,
        "sigma_mle": sigma_mle,
        "gap": gap,
        "min_eigenvalue": float(np.linalg.eigvalsh(gap).min()),
    }


def rate_slope(ts, mse):
    """Slope of log(mse) against log(t)"""
    return stats.linregress(np.log(ts), np.log(mse)).slope


@dataclass
class CoverageReport:
    """Monte Carlo check of the asymptotic normality of the VI estimator

    :param (array) coverage_per_coord, share of replications whose Wald
        interval contains beta_star_j
    :param (array) mean_sandwich, mean of the estimated sandwich matrices
    :param (array) mc_covariance, sample covariance of sqrt(N) (beta_hat - beta_star)
    :param (array) standardized_covariance, mc_covariance standardized by the
        mean sandwich, close to the identity under normality
    :param (float) frobenius_to_identity
    :param (int) reps, replications used
    :param (int) excluded_reps, replications that failed to converge
    """

    coverage_per_coord: np.ndarray
    mean_sandwich: np.ndarray
    mc_covariance: np.ndarray
    standardized_covariance: np.ndarray
    frobenius_to_identity: float
    reps: int
    excluded_reps: int

    def to_dict(self):
        report = asdict(self)
        for key, value in report.items():
            if isinstance(value, np.ndarray):
                report[key] = value.tolist()
        return report


def coverage_replication(config, N, rep):
    """One replication: (beta_hat - beta_star, sandwich) or None on failure"""
    from glmvi.experiment.synth import beta_star_vector, generate

    rep_config = replace(config, N=N, seed=config.seed + rep)
    try:
        data = generate(rep_config)
        beta_hat = solve_vi(config.link, data)
        estimate = vi_sandwich(config.link, data, beta_hat)
    except (NotConvergedError, DivergenceError, SingularityError, DomainError) as error:
        logger.warning("Replication %s excluded: %s", rep, error)
        return None
    return beta_hat - beta_star_vector(config), estimate.sandwich


def normality_check(config, reps, N=None, multi_process=False):
    """Coverage of 95% Wald intervals over replications

    Replication r uses the seed config.seed + r.

    :param (ExperimentConfig) config
    :param (int) reps, at least 100
    :param (int) N, sample size, defaults to config.N
    :param multi_process, True runs replications on all cores, an integer on
        that many processes
    :return (CoverageReport)
    """
    if reps < 100:
        raise ParameterError(f"The normality check needs at least 100 reps, got {reps}")
    N = config.N if N is None else N
    func = partial(coverage_replication, config, N)
    if multi_process:
        with Pool(None if multi_process is True else multi_process) as pool:
            results = pool.map(func, range(reps))
    else:
        results = [func(rep) for rep in range(reps)]
    kept = [result for result in results if result is not None]
    excluded = reps - len(kept)
    if len(kept) < 2:
        raise NotConvergedError(f"Only {len(kept)} replication(s) converged")
    errors = np.array([error for error, _ in kept])
    sandwiches = np.array([matrix for _, matrix in kept])
    half_widths = Z_95 * np.sqrt(np.clip(np.diagonal(sandwiches, axis1=1, axis2=2), 0, None) / N)
    coverage = (np.abs(errors) <= half_widths).mean(axis=0)
    mean_sandwich = symmetrize(sandwiches.mean(axis=0))
    mc_covariance = np.atleast_2d(np.cov(math.sqrt(N) * errors, rowvar=False))
    root = inverse_sqrt_psd(mean_sandwich)
    standardized = symmetrize(root @ mc_covariance @ root)
    distance = float(np.linalg.norm(standardized - np.eye(len(standardized))))
    logger.info(
        "Coverage over %s replications (%s excluded): %s", len(kept), excluded, coverage
    )
    return CoverageReport(
        coverage, mean_sandwich, mc_covariance, standardized, distance, len(kept), excluded
    )
