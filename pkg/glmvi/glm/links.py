#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Catalog of inverse link functions g^-1 with their values, derivatives
(one sided at kinks) and constants (Lipschitz constant L and, where known,
the monotonicity modulus mu_g).

Create links with the constructors or from a command line specification:

    from glmvi.glm.links import softplus, clipped_exp, parse_link, link_eval
    link_eval(softplus(), 0.0)  # 0.6931471805599453
    link = parse_link("clipped_exp:c=0,C=2")
    link_eval(link, 1.0)  # 2.0
    parse_link("gmmcdf:w=1.65,1.35;m=-0.5,1.2;s=0.7,0.5").lipschitz

All evaluation functions accept a float or a numpy array. An array input
returns an array of the same shape.
"""

# Third party modules
import math
from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np
from scipy import special, stats

# Internal modules
from glmvi.common.errors import DomainError, KinkError, ParameterError

# Points closer than this to a kink are treated as the kink
KINK_TOL = 1e-12

SIDES = ("left", "right", "two_sided")

# Mixture used in the experiments for the gmm_cdf link
GMM_DEFAULT = ((1.65, 1.35), (-0.5, 1.2), (0.7, 0.5))


@dataclass(frozen=True)
class LinkFunction:
    """Immutable description of an inverse link g^-1

    :param (str) kind, one of the keys of `KINDS`
    :param (tuple) params, kind specific parameters
    :param (float) lipschitz, global Lipschitz constant, `math.inf` if none
    :param (float) monotone_modulus, modulus mu_g of the scalar map or None
    :param (tuple) kinks, points where g^-1 is not differentiable
    :param (bool) is_monotone, True if g^-1 is non decreasing
    """

    kind: str
    params: Tuple = ()
    lipschitz: float = 1.0
    monotone_modulus: Optional[float] = None
    kinks: Tuple[float, ...] = ()
    is_monotone: bool = True

    @property
    def name(self):
        return link_spec(self)


###########################
# Closed forms per kind   #
###########################
def _sigmoid(z):
    return special.expit(z)


def _softplus(z):
    out = np.empty_like(z)
    neg = z <= 0
    out[neg] = np.log1p(np.exp(z[neg]))
    out[~neg] = z[~neg] + np.log1p(np.exp(-z[~neg]))
    return out


def _phi_cdf(t):
    return 0.5 * special.erfc(-t / math.sqrt(2))


def _gmm_terms(z, params):
    weights, means, scales = (np.asarray(p, dtype=float) for p in params)
    t = (z[..., None] - means) / scales
    return weights, scales, t


def _gmm_value(z, params):
    weights, _, t = _gmm_terms(z, params)
    return (weights * _phi_cdf(t)).sum(axis=-1)


def _gmm_deriv(z, params):
    weights, scales, t = _gmm_terms(z, params)
    return (weights / scales * stats.norm.pdf(t)).sum(axis=-1)


def _gmm_deriv2(z, params):
    weights, scales, t = _gmm_terms(z, params)
    return (-weights / scales**2 * t * stats.norm.pdf(t)).sum(axis=-1)


def _clip_bounds(params):
    c, upper = params
    lower = math.log(c) if c > 0 else -math.inf
    return lower, math.log(upper)


def _clipped_value(z, params):
    c, upper = params
    with np.errstate(over="ignore"):
        return np.maximum(c, np.minimum(np.exp(z), upper))


def _clipped_interior(z, params, side):
    lower, upper = _clip_bounds(params)
    if side == "left":
        return (z > lower) & (z <= upper)
    return (z >= lower) & (z < upper)


def _clipped_deriv(z, params, side):
    inside = _clipped_interior(z, params, side)
    return np.where(inside, np.exp(np.minimum(z, math.log(params[1]))), 0.0)


def _relu_deriv(z, params, side):
    if side == "left":
        return np.where(z > 0, 1.0, 0.0)
    return np.where(z >= 0, 1.0, 0.0)


# value, derivative, second derivative. Piecewise kinds take the side.
KINDS = {
    "identity": (
        lambda z, p: z.copy(),
        lambda z, p: np.ones_like(z),
        lambda z, p: np.zeros_like(z),
    ),
    "logit_sigmoid": (
        lambda z, p: _sigmoid(z),
        lambda z, p: _sigmoid(z) * (1 - _sigmoid(z)),
        lambda z, p: _sigmoid(z) * (1 - _sigmoid(z)) * (1 - 2 * _sigmoid(z)),
    ),
    "exp": (
        lambda z, p: np.exp(z),
        lambda z, p: np.exp(z),
        lambda z, p: np.exp(z),
    ),
    "neg_exp": (
        lambda z, p: np.exp(-z),
        lambda z, p: -np.exp(-z),
        lambda z, p: np.exp(-z),
    ),
    "reciprocal": (
        lambda z, p: 1 / z,
        lambda z, p: -1 / z**2,
        lambda z, p: 2 / z**3,
    ),
    "arctan_cdf": (
        lambda z, p: 0.5 + np.arctan(z) / math.pi,
        lambda z, p: 1 / (math.pi * (1 + z**2)),
        lambda z, p: -2 * z / (math.pi * (1 + z**2) ** 2),
    ),
    "softplus": (
        lambda z, p: _softplus(z),
        lambda z, p: _sigmoid(z),
        lambda z, p: _sigmoid(z) * (1 - _sigmoid(z)),
    ),
    "clipped_exp": (
        _clipped_value,
        _clipped_deriv,
        _clipped_deriv,
    ),
    "relu": (
        lambda z, p: np.maximum(z, 0.0),
        _relu_deriv,
        lambda z, p, side: np.zeros_like(z),
    ),
    "gmm_cdf": (
        _gmm_value,
        _gmm_deriv,
        _gmm_deriv2,
    ),
    "minty_sine": (
        lambda z, p: z + 2 * np.sin(z) * np.cos(z),
        lambda z, p: 1 + 2 * (np.cos(z) ** 2 - np.sin(z) ** 2),
        lambda z, p: -8 * np.sin(z) * np.cos(z),
    ),
}

PIECEWISE = ("clipped_exp", "relu")


################
# Constructors #
################
def identity():
    return LinkFunction("identity", (), 1.0, 1.0)


def logit_sigmoid():
    return LinkFunction("logit_sigmoid", (), 0.25, None)


def exp_link():
    """Log link, g^-1(z) = e^z, not globally Lipschitz"""
    return LinkFunction("exp", (), math.inf, None)


def neg_exp():
    """g^-1(z) = e^-z, a decreasing mean for the exponential family"""
    return LinkFunction("neg_exp", (), math.inf, None, is_monotone=False)


def reciprocal():
    """Canonical exponential family link g^-1(z) = 1/z, defined for z != 0"""
    return LinkFunction("reciprocal", (), math.inf, None, is_monotone=False)


def arctan_cdf():
    return LinkFunction("arctan_cdf", (), 1 / math.pi, None)


def softplus():
    return LinkFunction("softplus", (), 1.0, None)


def clipped_exp(c=0.0, upper=2.0):
    """max(c, min(e^z, upper)) with kinks at log c (if c > 0) and log upper"""
    c, upper = float(c), float(upper)
    if not (0 <= c < upper) or not math.isfinite(upper):
        raise ParameterError(f"clipped_exp needs 0 <= c < C, got c={c}, C={upper}")
    kinks = tuple(math.log(v) for v in (c, upper) if v > 0)
    return LinkFunction("clipped_exp", (c, upper), upper, None, kinks)


def relu():
    return LinkFunction("relu", (), 1.0, None, (0.0,))


def gmm_cdf(weights=GMM_DEFAULT[0], means=GMM_DEFAULT[1], scales=GMM_DEFAULT[2]):
    """Scaled Gaussian mixture CDF, sum of w_i Phi((z - m_i) / s_i)"""
    weights, means, scales = (tuple(float(v) for v in p) for p in (weights, means, scales))
    if not weights or not len(weights) == len(means) == len(scales):
        raise ParameterError("gmm_cdf needs non empty weights, means, scales of equal length")
    if min(scales) <= 0 or min(weights) < 0 or sum(weights) == 0:
        raise ParameterError("gmm_cdf needs positive scales and non negative weights")
    lipschitz = sum(w / (s * math.sqrt(2 * math.pi)) for w, s in zip(weights, scales))
    return LinkFunction("gmm_cdf", (weights, means, scales), lipschitz, None)


def minty_sine():
    """z + 2 sin z cos z, not monotone but Minty with modulus 1/2"""
    return LinkFunction("minty_sine", (), 3.0, 0.5, is_monotone=False)


##############
# Evaluation #
##############
def _as_array(link, z):
    """Check finiteness and return a float array"""
    array = np.array(z, dtype=float, ndmin=1)
    if not np.all(np.isfinite(array)):
        raise DomainError(f"Non finite argument for link {link.kind}", name=link.kind)
    if link.kind == "reciprocal" and np.any(array == 0):
        raise DomainError("The reciprocal link is undefined at z = 0", name=link.kind)
    return array


def _restore(z, result):
    """Scalar in, scalar out"""
    if np.ndim(z) == 0:
        return float(result[0])
    return result.reshape(np.shape(z))


def link_eval(link, z):
    """Inverse link value g^-1(z)

    :param (LinkFunction) link
    :param (float or array) z, linear predictor
    :return value of the same shape as z
    """
    array = _as_array(link, z)
    value = KINDS[link.kind][0](array, link.params)
    return _restore(z, value)


def kink_mask(link, z):
    """Boolean mask of entries within KINK_TOL of a kink of the link"""
    array = np.array(z, dtype=float, ndmin=1)
    mask = np.zeros(array.shape, dtype=bool)
    for kink in link.kinks:
        mask |= np.abs(array - kink) <= KINK_TOL
    return mask


def _snap_to_kinks(link, array):
    for kink in link.kinks:
        array = np.where(np.abs(array - kink) <= KINK_TOL, kink, array)
    return array


def link_deriv(link, z, side="right"):
    """Derivative of the inverse link

    :param (LinkFunction) link
    :param (float or array) z
    :param (str) side, "left", "right" or "two_sided". The right derivative is
        used by the solvers at kinks.
    :raise KinkError if side is "two_sided" and z is at a kink
    """
    if side not in SIDES:
        raise ParameterError(f"side must be one of {SIDES}, got {side}")
    array = _as_array(link, z)
    if side == "two_sided":
        mask = kink_mask(link, array)
        if mask.any():
            location = float(array[mask][0])
            raise KinkError(
                f"Two sided derivative of {link.kind} at the kink {location}",
                location=location,
            )
    deriv = KINDS[link.kind][1]
    if link.kind in PIECEWISE:
        array = _snap_to_kinks(link, array)
        value = deriv(array, link.params, "left" if side == "left" else "right")
    else:
        value = deriv(array, link.params)
    return _restore(z, value)


def link_deriv2(link, z, side="right"):
    """Second derivative of the inverse link, one sided at kinks"""
    array = _as_array(link, z)
    deriv2 = KINDS[link.kind][2]
    if link.kind in PIECEWISE:
        array = _snap_to_kinks(link, array)
        value = deriv2(array, link.params, "left" if side == "left" else "right")
    else:
        value = deriv2(array, link.params)
    return _restore(z, value)


def link_constants(link):
    """Lipschitz constant and monotone modulus (None when unknown)"""
    return link.lipschitz, link.monotone_modulus


def softplus_curvature_ratio(z):
    """Ratio softplus(z) / sigmoid(z) between the VI and MLE curvature weights"""
    link = softplus()
    return link_eval(link, z) / link_deriv(link, z)


###########
# Parsing #
###########
ALIASES = {
    "identity": identity,
    "logit_sigmoid": logit_sigmoid,
    "sigmoid": logit_sigmoid,
    "exp": exp_link,
    "log": exp_link,
    "neg_exp": neg_exp,
    "reciprocal": reciprocal,
    "arctan_cdf": arctan_cdf,
    "arctan": arctan_cdf,
    "softplus": softplus,
    "relu": relu,
    "minty_sine": minty_sine,
}


def _parse_floats(text, spec):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ParameterError(f"Malformed numbers '{text}' in link spec '{spec}'")


def parse_link(spec):
    """Link from its command line specification

    Accepted forms: `log`, `softplus`, `clipped_exp:c=0,C=2`,
    `gmmcdf:w=1.65,1.35;m=-0.5,1.2;s=0.7,0.5`, `identity`, `sigmoid`,
    `reciprocal`, `relu`, `minty_sine`, `arctan_cdf`, `neg_exp`.
    `clipped_exp` and `gmmcdf` without arguments use (0, 2) and the
    experiment mixture.
    """
    spec = spec.strip()
    kind, _, args = spec.partition(":")
    kind = kind.strip().lower()
    if kind in ALIASES:
        if args:
            raise ParameterError(f"Link '{kind}' takes no parameters, got '{spec}'")
        return ALIASES[kind]()
    if kind == "clipped_exp":
        values = {"c": 0.0, "C": 2.0}
        for item in filter(None, args.split(",")):
            key, _, value = item.partition("=")
            if key.strip() not in values:
                raise ParameterError(f"Unknown clipped_exp parameter in '{spec}'")
            values[key.strip()] = _parse_floats(value, spec)[0]
        return clipped_exp(values["c"], values["C"])
    if kind in ("gmmcdf", "gmm_cdf"):
        values = dict(zip("wms", GMM_DEFAULT))
        for item in filter(None, args.split(";")):
            key, _, value = item.partition("=")
            if key.strip() not in values:
                raise ParameterError(f"Unknown gmmcdf parameter in '{spec}'")
            values[key.strip()] = _parse_floats(value, spec)
        return gmm_cdf(values["w"], values["m"], values["s"])
    raise ParameterError(f"Unknown link specification '{spec}'")


def link_spec(link):
    """Command line specification of a link, inverse of `parse_link`"""
    if link.kind == "exp":
        return "log"
    if link.kind == "clipped_exp":
        c, upper = link.params
        return f"clipped_exp:c={c:g},C={upper:g}"
    if link.kind == "gmm_cdf":
        parts = (",".join(f"{v:g}" for v in p) for p in link.params)
        return "gmmcdf:" + ";".join(f"{k}={v}" for k, v in zip("wms", parts))
    return link.kind
