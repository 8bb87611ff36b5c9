#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Exponential family losses l(u, y) (negative log-likelihood in the mean u, up
to terms free of u) and the per observation VI operator and MLE gradient.

    import numpy as np
    from glmvi.glm.families import poisson, Observation, vi_sample_op, mle_sample_grad
    from glmvi.glm.links import softplus
    obs = Observation(x=np.array([1.0]), y=0.0)
    vi_sample_op(softplus(), obs, np.zeros(2), intercept=True)  # array([0.69314718, 0.69314718])
    mle_sample_grad(poisson(), softplus(), obs, np.zeros(2), intercept=True)

The MLE gradient is g^-1'(z) l'(g^-1(z), y) x. It needs the mean to stay in
the loss domain. When the mean reaches the domain boundary (a Poisson mean
underflowing to 0 for instance) the mean is clamped to `U_CLAMP` and the clamp
is logged. The VI operator (g^-1(z) - y) x never needs such a clamp.
"""

# Third party modules
import logging
from dataclasses import dataclass
import numpy as np

# Internal modules
from glmvi.common.errors import DomainError, ParameterError, ShapeError
from glmvi.glm.links import link_deriv, link_deriv2, link_eval

# Smallest mean fed to a logarithm
U_CLAMP = 1e-300

logger = logging.getLogger("glmvi.glm")


@dataclass(frozen=True)
class Family:
    """Response family

    :param (str) kind, gaussian, bernoulli, poisson or exponential
    :param (str) canonical_link_kind, link kind for which the MLE gradient
        equals the VI operator (up to sign for the exponential family)
    """

    kind: str
    canonical_link_kind: str


@dataclass(frozen=True)
class Observation:
    """One covariate vector x of length d and its response y"""

    x: np.ndarray
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.array(self.x, dtype=float, ndmin=1))
        object.__setattr__(self, "y", float(self.y))


def gaussian():
    return Family("gaussian", "identity")


def bernoulli():
    return Family("bernoulli", "logit_sigmoid")


def poisson():
    return Family("poisson", "exp")


def exponential():
    return Family("exponential", "reciprocal")


FAMILIES = {
    "gaussian": gaussian,
    "bernoulli": bernoulli,
    "poisson": poisson,
    "exponential": exponential,
}


def parse_family(spec):
    """Family from its command line name"""
    try:
        return FAMILIES[spec.strip().lower()]()
    except KeyError:
        raise ParameterError(
            f"Unknown family '{spec}', expected one of {list(FAMILIES)}"
        )


##########
# Losses #
##########
def _check_domain(family, u):
    """Raise if some mean is outside the open loss domain"""
    u = np.asarray(u, dtype=float)
    if family.kind == "gaussian":
        inside = np.isfinite(u)
    elif family.kind == "bernoulli":
        inside = (u > 0) & (u < 1)
    else:
        inside = u > 0
    if not np.all(inside):
        raise DomainError(
            f"Mean outside the {family.kind} loss domain: {u[~inside][:5]}",
            name=family.kind,
        )
    return u


def clamp_mean(family, u, link_name=None):
    """Clamp means sitting on the loss domain boundary

    Means strictly outside the closed domain raise a DomainError.
    """
    u = np.asarray(u, dtype=float)
    if family.kind == "gaussian":
        return _check_domain(family, u)
    upper = 1.0 if family.kind == "bernoulli" else np.inf
    outside = ~((u >= 0) & (u <= upper))
    if np.any(outside):
        raise DomainError(
            f"Mean outside the {family.kind} loss domain with link {link_name}:"
            f" {u[outside][:5]}",
            name=family.kind,
        )
    at_boundary = (u < U_CLAMP) | (u == upper)
    if np.any(at_boundary):
        logger.debug(
            "Clamped %s mean(s) on the %s loss boundary (link %s)",
            int(at_boundary.sum()),
            family.kind,
            link_name,
        )
        u = np.clip(u, U_CLAMP, np.nextafter(upper, 0))
    return u


def loss(family, u, y):
    """Loss l(u, y)

    :param (Family) family
    :param (float or array) u, mean in the loss domain
    :param (float or array) y, response
    """
    u = _check_domain(family, u)
    y = np.asarray(y, dtype=float)
    if family.kind == "gaussian":
        value = 0.5 * (u - y) ** 2
    elif family.kind == "bernoulli":
        value = -y * np.log(u) - (1 - y) * np.log1p(-u)
    elif family.kind == "poisson":
        value = -y * np.log(u) + u
    else:
        value = np.log(u) + y / u
    return value if value.ndim else float(value)


def _loss_deriv(kind, u, y):
    if kind == "gaussian":
        return u - y
    if kind == "bernoulli":
        return -y / u + (1 - y) / (1 - u)
    if kind == "poisson":
        return 1 - y / u
    return 1 / u - y / u**2


def _loss_deriv2(kind, u, y):
    if kind == "gaussian":
        return np.ones_like(u)
    if kind == "bernoulli":
        return y / u**2 + (1 - y) / (1 - u) ** 2
    if kind == "poisson":
        return y / u**2
    return -1 / u**2 + 2 * y / u**3


def loss_deriv(family, u, y):
    """Partial derivative of the loss in u"""
    u = _check_domain(family, u)
    value = _loss_deriv(family.kind, u, np.asarray(y, dtype=float))
    return value if np.ndim(value) else float(value)


def loss_deriv2(family, u, y):
    """Second partial derivative of the loss in u"""
    u = _check_domain(family, u)
    value = _loss_deriv2(family.kind, u, np.asarray(y, dtype=float))
    return value if np.ndim(value) else float(value)


def variance(family, u):
    """Model implied variance Var(y | x) as a function of the mean"""
    u = np.asarray(u, dtype=float)
    if family.kind == "gaussian":
        return np.ones_like(u)
    if family.kind == "bernoulli":
        return u * (1 - u)
    if family.kind == "poisson":
        return u.copy()
    return u**2


def check_observation(family, obs):
    """Raise a DomainError if the response is not valid for the family"""
    if not (np.all(np.isfinite(obs.x)) and np.isfinite(obs.y)):
        raise DomainError("Observation has non finite entries", name=family.kind)
    y = obs.y
    if family.kind == "poisson" and (y < 0 or y != np.floor(y)):
        raise DomainError(f"Poisson response must be a count, got {y}", name="poisson")
    if family.kind == "bernoulli" and y not in (0.0, 1.0):
        raise DomainError(f"Bernoulli response must be 0 or 1, got {y}", name="bernoulli")
    if family.kind == "exponential" and y < 0:
        raise DomainError(f"Exponential response must be >= 0, got {y}", name="exponential")


#################################
# Vectorised weights per sample #
#################################
def mle_weights(family, link, z, y):
    """Scalar factors g^-1'(z) l'(g^-1(z), y) of the MLE gradient"""
    u = clamp_mean(family, link_eval(link, z), link.kind)
    return link_deriv(link, z, "right") * _loss_deriv(family.kind, u, y)


def mle_hessian_weights(family, link, z, y):
    """Scalar factors of the per sample NLL Hessian

    g^-1''(z) l'(u, y) + g^-1'(z)^2 l''(u, y) with u = g^-1(z)
    """
    u = clamp_mean(family, link_eval(link, z), link.kind)
    first = link_deriv(link, z, "right")
    second = link_deriv2(link, z, "right")
    return second * _loss_deriv(family.kind, u, y) + first**2 * _loss_deriv2(
        family.kind, u, y
    )


###################
# Per observation #
###################
def augment(x, beta, intercept):
    """Augmented covariates x_tilde = [1; x] if intercept else x"""
    x = np.array(x, dtype=float, ndmin=1)
    beta = np.asarray(beta, dtype=float)
    x_tilde = np.concatenate([[1.0], x]) if intercept else x
    if beta.shape != x_tilde.shape:
        raise ShapeError(
            f"beta has shape {beta.shape}, expected {x_tilde.shape}"
            f" for d={x.size} and intercept={intercept}"
        )
    return x_tilde


def vi_sample_op(link, obs, beta, intercept=False):
    """Per observation VI operator (g^-1(x_tilde' beta) - y) x_tilde"""
    x_tilde = augment(obs.x, beta, intercept)
    z = float(x_tilde @ np.asarray(beta, dtype=float))
    return (link_eval(link, z) - obs.y) * x_tilde


def mle_sample_grad(family, link, obs, beta, intercept=False):
    """Per observation gradient of the loss l(g^-1(x_tilde' beta), y)"""
    x_tilde = augment(obs.x, beta, intercept)
    z = np.array([x_tilde @ np.asarray(beta, dtype=float)])
    return mle_weights(family, link, z, np.array([obs.y]))[0] * x_tilde


def mle_sample_hessian(family, link, obs, beta, intercept=False):
    """Per observation Hessian of the loss in beta"""
    x_tilde = augment(obs.x, beta, intercept)
    z = np.array([x_tilde @ np.asarray(beta, dtype=float)])
    weight = mle_hessian_weights(family, link, z, np.array([obs.y]))[0]
    return weight * np.outer(x_tilde, x_tilde)


def sample_loss(family, link, obs, beta, intercept=False):
    """Composed loss l(g^-1(x_tilde' beta), y) of one observation"""
    x_tilde = augment(obs.x, beta, intercept)
    z = np.array([x_tilde @ np.asarray(beta, dtype=float)])
    u = clamp_mean(family, link_eval(link, z), link.kind)
    return loss(family, u, obs.y)[0]
