#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Empirical operators over a dataset: the VI operator V_N, the mean MLE
gradient, their Jacobians, residual moment matrices and the Minty condition
diagnostics.

    import numpy as np
    from glmvi.glm.links import softplus
    from glmvi.glm.families import poisson
    from glmvi.glm.operators import Dataset, empirical_vi, vi_jacobian, minty_lemma1
    rng = np.random.default_rng(1)
    x = rng.standard_normal((500, 3))
    y = rng.poisson(np.log1p(np.exp(x.sum(axis=1) / 3)))
    data = Dataset(x, y)
    empirical_vi(softplus(), data, np.zeros(3))
    vi_jacobian(softplus(), data, np.zeros(3))
    minty_lemma1(softplus(), data)

The MLE objective is the mean negative log-likelihood, the sum of the losses
divided by N. Step sizes are therefore comparable between the VI operator and
the MLE gradient.
"""

# Third party modules
import logging
import math
from collections import Counter
from dataclasses import dataclass, asdict
from functools import cached_property
from typing import Optional
import numpy as np
import pandas

# Internal modules
from glmvi.common.errors import EmptyDatasetError, ParameterError, ShapeError
from glmvi.common.linalg import min_singular_value, row_mean, weighted_gram
from glmvi.glm.families import (
    Observation,
    clamp_mean,
    loss,
    mle_hessian_weights,
    mle_weights,
    variance,
)
from glmvi.glm.links import kink_mask, link_deriv, link_eval

# Minty probe
PROBE_DIRECTIONS = 256
PROBE_RADII = (0.1, 1.0, 10.0)

logger = logging.getLogger("glmvi.glm")

# Kink hits seen by vi_jacobian, per link kind
kink_events = Counter()


@dataclass(frozen=True)
class Dataset:
    """N observations stored as a covariate matrix and a response vector

    :param (array) X, (N, d) covariates
    :param (array) y, (N,) responses
    :param (bool) intercept, prepend a column of ones to the design
    :param (float) R, optional user supplied bound on |g^-1(z) - y|
    """

    X: np.ndarray
    y: np.ndarray
    intercept: bool = False
    R: Optional[float] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(y.size, 0)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ShapeError(f"X {X.shape} and y {y.shape} do not match")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ParameterError("Dataset has non finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def N(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def p(self):
        """Number of parameters"""
        return self.d + int(self.intercept)

    @cached_property
    def design(self):
        """Augmented design matrix [1 X] or X"""
        if self.intercept:
            return np.hstack([np.ones((self.N, 1)), self.X])
        return self.X

    @property
    def M(self):
        """Largest absolute covariate entry"""
        return float(np.abs(self.X).max()) if self.X.size else 0.0

    @property
    def observations(self):
        return [Observation(x, y) for x, y in zip(self.X, self.y)]

    @classmethod
    def from_observations(cls, observations, intercept=False, R=None):
        """Dataset from a list of Observation objects sharing dimension d"""
        if len({obs.x.size for obs in observations}) > 1:
            raise ShapeError("Observations have different dimensions")
        if not observations:
            return cls(np.zeros((0, 0)), np.zeros(0), intercept, R)
        X = np.vstack([obs.x for obs in observations])
        y = np.array([obs.y for obs in observations])
        return cls(X, y, intercept, R)

    def concat(self, other):
        """Pool two datasets with the same dimension and intercept flag"""
        if self.d != other.d or self.intercept != other.intercept:
            raise ShapeError("Cannot concatenate datasets of different structure")
        return Dataset(
            np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]), self.intercept
        )

    def to_frame(self):
        """Data frame with columns x_1 ... x_d, y"""
        df = pandas.DataFrame(self.X, columns=[f"x_{j + 1}" for j in range(self.d)])
        df["y"] = self.y
        return df

    @classmethod
    def from_frame(cls, df, intercept=False):
        """Dataset from a data frame with a y column and x_ covariate columns"""
        if "y" not in df.columns:
            raise ParameterError("Data frame needs a 'y' column")
        x_columns = [col for col in df.columns if col.startswith("x_")]
        return cls(df[x_columns].to_numpy(), df["y"].to_numpy(), intercept)


@dataclass(frozen=True)
class MintyReport:
    """Minty condition diagnostics at the empirical solution

    `modulus_lemma1` is mu_g sigma_min^2 / N, None when mu_g is unknown.
    `satisfied` means the probed ratio stayed strictly positive.
    """

    sigma_min: float
    modulus_lemma1: Optional[float]
    grid_min_ratio: float
    satisfied: bool
    beta_hat: np.ndarray = None

    def to_dict(self):
        report = asdict(self)
        report["beta_hat"] = [float(v) for v in self.beta_hat]
        return report


def _linear_predictor(data, beta):
    if data.N == 0:
        raise EmptyDatasetError("The dataset has no observation")
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.p,):
        raise ShapeError(
            f"beta has shape {beta.shape}, expected ({data.p},)"
            f" for d={data.d} and intercept={data.intercept}"
        )
    return data.design @ beta


def residuals(link, data, beta):
    """g^-1(z_i) - y_i"""
    return link_eval(link, _linear_predictor(data, beta)) - data.y


def empirical_vi(link, data, beta):
    """V_N(beta), the mean of (g^-1(z_i) - y_i) x_i"""
    r = residuals(link, data, beta)
    return row_mean(data.design * r[:, None])


def empirical_mle_grad(family, link, data, beta):
    """Gradient of the mean negative log-likelihood"""
    z = _linear_predictor(data, beta)
    weights = mle_weights(family, link, z, data.y)
    return row_mean(data.design * weights[:, None])


def empirical_nll(family, link, data, beta):
    """Mean negative log-likelihood"""
    z = _linear_predictor(data, beta)
    u = clamp_mean(family, link_eval(link, z), link.kind)
    return float(row_mean(loss(family, u, data.y)))


def vi_jacobian(link, data, beta):
    """Jacobian (1/N) sum g^-1'(z_i) x_i x_i' of V_N

    Observations at a kink use the right derivative and are counted in
    `kink_events`.
    """
    z = _linear_predictor(data, beta)
    hits = int(kink_mask(link, z).sum())
    if hits:
        kink_events[link.kind] += hits
        logger.warning("%s observation(s) at a kink of %s", hits, link.kind)
    return weighted_gram(data.design, link_deriv(link, z, "right"))


def gamma_matrix(link, data, beta):
    """Residual second moment (1/N) sum (y_i - g^-1(z_i))^2 x_i x_i'"""
    r = residuals(link, data, beta)
    return weighted_gram(data.design, r**2)


def model_gamma(family, link, data, beta):
    """Model based second moment (1/N) sum Var(y | x_i) x_i x_i'"""
    z = _linear_predictor(data, beta)
    return weighted_gram(data.design, variance(family, link_eval(link, z)))


def mle_hessian(family, link, data, beta):
    """Mean per observation Hessian of the negative log-likelihood"""
    z = _linear_predictor(data, beta)
    return weighted_gram(data.design, mle_hessian_weights(family, link, z, data.y))


def score_covariance(family, link, data, beta):
    """Mean outer product of the per observation MLE gradients"""
    z = _linear_predictor(data, beta)
    return weighted_gram(data.design, mle_weights(family, link, z, data.y) ** 2)


def fisher_information(family, link, data, beta):
    """(1/N) sum g^-1'(z_i)^2 / Var(y | x_i) x_i x_i' with the model variance"""
    z = _linear_predictor(data, beta)
    u = clamp_mean(family, link_eval(link, z), link.kind)
    weights = link_deriv(link, z, "right") ** 2 / variance(family, u)
    return weighted_gram(data.design, weights)


def operator_bounds(link, data, beta):
    """Bounds on the per observation operator at a reference beta

    R is data.R when given, else max |g^-1(z_i) - y_i| at beta.

    :return (dict) R, M, sup_bound R M, euclidean_bound sqrt(d + 1) R M and
        sample_lipschitz L (1 + d M^2)
    """
    R = data.R
    if R is None:
        R = float(np.abs(residuals(link, data, beta)).max())
    M = max(data.M, 1.0) if data.intercept else data.M
    return {
        "R": R,
        "M": M,
        "sup_bound": R * M,
        "euclidean_bound": math.sqrt(data.d + 1) * R * M,
        "sample_lipschitz": link.lipschitz * (1 + data.d * data.M**2),
    }


#####################
# Minty diagnostics #
#####################
def _unit_directions(p, count, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    directions = rng.standard_normal((count, p))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def minty_ratios(link, data, beta_hat, radii=PROBE_RADII, n_directions=PROBE_DIRECTIONS, seed=0):
    """Ratios <V_N(beta), beta - beta_hat> / |beta - beta_hat|^2 on probe shells"""
    directions = _unit_directions(data.p, n_directions, seed)
    ratios = []
    for radius in radii:
        for direction in directions:
            step = radius * direction
            value = empirical_vi(link, data, beta_hat + step)
            ratios.append(value @ step / radius**2)
    return np.array(ratios)


def minty_lemma1(link, data, beta_hat=None, seed=0):
    """Minty condition report around the empirical solution

    :param (LinkFunction) link
    :param (Dataset) data
    :param (array) beta_hat, zero of V_N, computed with `solve_vi` if None
    :param (int) seed, seed of the probe directions
    :return (MintyReport)
    """
    if data.N == 0:
        raise EmptyDatasetError("The dataset has no observation")
    sigma_min = min_singular_value(data.design)
    modulus = None
    if link.monotone_modulus is not None:
        modulus = link.monotone_modulus * sigma_min**2 / data.N
    if beta_hat is None:
        from glmvi.estimation.solvers import solve_vi

        beta_hat = solve_vi(link, data)
    ratios = minty_ratios(link, data, np.asarray(beta_hat, dtype=float), seed=seed)
    grid_min = float(ratios.min())
    logger.debug(
        "Minty probe for %s: sigma_min %.4g, min ratio %.4g", link.kind, sigma_min, grid_min
    )
    return MintyReport(sigma_min, modulus, grid_min, grid_min > 0, np.asarray(beta_hat))


def minty_from_weak_monotone(rho, lipschitz, mu_eb):
    """Strong Minty modulus implied by weak monotonicity and an error bound

    :param (float) rho, weak monotonicity constant, 0 <= rho < lipschitz
    :param (float) lipschitz, Lipschitz constant L of the operator
    :param (float) mu_eb, error bound constant, positive
    :return (float) (mu_eb^2 - rho L) / (L - rho) or None when rho L >= mu_eb^2
    """
    if not (0 <= rho < lipschitz) or not mu_eb > 0:
        raise ParameterError(
            f"Need lipschitz > rho >= 0 and mu_eb > 0, got rho={rho},"
            f" lipschitz={lipschitz}, mu_eb={mu_eb}"
        )
    if rho * lipschitz >= mu_eb**2:
        return None
    return (mu_eb**2 - rho * lipschitz) / (lipschitz - rho)


def weak_monotone_probe(link, data, beta_hat, radii=PROBE_RADII, n_pairs=PROBE_DIRECTIONS, seed=0):
    """Empirical weak monotonicity and error bound constants around beta_hat

    rho is the smallest value such that
    <V(b2) - V(b1), b2 - b1> >= -rho/2 |b2 - b1|^2 on random pairs, mu_eb the
    smallest ratio |V(b)| / |b - beta_hat| on the probe shells. Both are
    estimates from a finite probe, not certificates.

    :return (dict) rho, mu_eb
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    rng = np.random.Generator(np.random.Philox(seed))
    worst = np.inf
    for radius in radii:
        for _ in range(n_pairs):
            first = beta_hat + radius * rng.uniform(-1, 1, data.p)
            second = beta_hat + radius * rng.uniform(-1, 1, data.p)
            gap = second - first
            value = empirical_vi(link, data, second) - empirical_vi(link, data, first)
            worst = min(worst, value @ gap / (gap @ gap))
    at_solution = empirical_vi(link, data, beta_hat)
    mu_eb = np.inf
    for radius in radii:
        for direction in _unit_directions(data.p, n_pairs, seed + 1):
            value = empirical_vi(link, data, beta_hat + radius * direction) - at_solution
            mu_eb = min(mu_eb, np.linalg.norm(value) / radius)
    return {"rho": max(0.0, -2 * worst), "mu_eb": float(mu_eb)}
