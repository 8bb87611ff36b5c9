#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Test the exponential family losses and the per observation operators

"""

import math
import numpy as np
import pytest

from glmvi.common.errors import DomainError, ParameterError, ShapeError
from glmvi.glm.families import (
    Observation,
    augment,
    bernoulli,
    check_observation,
    clamp_mean,
    exponential,
    gaussian,
    loss,
    loss_deriv,
    loss_deriv2,
    mle_sample_grad,
    mle_sample_hessian,
    parse_family,
    poisson,
    sample_loss,
    variance,
    vi_sample_op,
)
from glmvi.glm.links import (
    arctan_cdf,
    clipped_exp,
    exp_link,
    identity,
    logit_sigmoid,
    reciprocal,
    softplus,
)

CANONICAL = [
    (gaussian(), identity(), 1.0),
    (bernoulli(), logit_sigmoid(), 1.0),
    (poisson(), exp_link(), 1.0),
    (exponential(), reciprocal(), -1.0),
]


def test_loss_values():
    assert loss(gaussian(), 2.0, 0.5) == pytest.approx(1.125)
    assert loss(bernoulli(), 0.25, 1.0) == pytest.approx(-math.log(0.25))
    assert loss(poisson(), 2.0, 3.0) == pytest.approx(-3 * math.log(2) + 2)
    assert loss(exponential(), 2.0, 1.0) == pytest.approx(math.log(2) + 0.5)


@pytest.mark.parametrize("family", [gaussian(), bernoulli(), poisson(), exponential()],
                         ids=lambda f: f.kind)
def test_loss_derivatives(family):
    h = 1e-6
    y = 1.0
    for u in (0.2, 0.5, 0.8):
        numeric = (loss(family, u + h, y) - loss(family, u - h, y)) / (2 * h)
        assert loss_deriv(family, u, y) == pytest.approx(numeric, rel=1e-6)
        numeric2 = (loss_deriv(family, u + h, y) - loss_deriv(family, u - h, y)) / (2 * h)
        assert loss_deriv2(family, u, y) == pytest.approx(numeric2, rel=1e-5)


def test_loss_domain():
    with pytest.raises(DomainError):
        loss(bernoulli(), 1.0, 1.0)
    with pytest.raises(DomainError):
        loss(poisson(), 0.0, 1.0)
    with pytest.raises(DomainError):
        loss(exponential(), -1.0, 1.0)
    with pytest.raises(DomainError):
        loss(gaussian(), np.inf, 1.0)


def test_clamp_mean():
    clamped = clamp_mean(poisson(), np.array([0.0, 2.0]), "exp")
    assert clamped[0] > 0 and clamped[1] == 2.0
    assert clamp_mean(bernoulli(), np.array([1.0]))[0] < 1
    with pytest.raises(DomainError):
        clamp_mean(poisson(), np.array([-0.5]))


def test_variance():
    u = np.array([0.2, 0.5])
    np.testing.assert_allclose(variance(gaussian(), u), [1, 1])
    np.testing.assert_allclose(variance(bernoulli(), u), [0.16, 0.25])
    np.testing.assert_allclose(variance(poisson(), u), u)
    np.testing.assert_allclose(variance(exponential(), u), u**2)


def test_check_observation():
    check_observation(poisson(), Observation([1.0], 3))
    with pytest.raises(DomainError):
        check_observation(poisson(), Observation([1.0], 2.5))
    with pytest.raises(DomainError):
        check_observation(bernoulli(), Observation([1.0], 0.5))
    with pytest.raises(DomainError):
        check_observation(exponential(), Observation([1.0], -1))


def test_parse_family():
    assert parse_family("Poisson") == poisson()
    with pytest.raises(ParameterError):
        parse_family("gamma")


def test_augment():
    np.testing.assert_array_equal(augment([2.0, 3.0], np.zeros(3), True), [1, 2, 3])
    with pytest.raises(ShapeError):
        augment([2.0, 3.0], np.zeros(3), False)


def test_vi_sample_op_intercept_only():
    obs = Observation(np.zeros(0), 1.0)
    value = vi_sample_op(softplus(), obs, np.zeros(1), intercept=True)
    np.testing.assert_allclose(value, [math.log(2) - 1])


def test_vi_sample_op_examples():
    obs = Observation([1.0], 0.0)
    value = vi_sample_op(softplus(), obs, np.zeros(2), intercept=True)
    np.testing.assert_allclose(value, [math.log(2), math.log(2)])
    obs = Observation([2.0], 1.0)
    # Clipped at C = 2
    value = vi_sample_op(clipped_exp(0, 2), obs, np.array([1.0]))
    np.testing.assert_allclose(value, [2.0])


@pytest.mark.parametrize("family, link, sign", CANONICAL, ids=lambda v: getattr(v, "kind", ""))
def test_canonical_equivalence(family, link, sign):
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.uniform(-1, 1, 2)
        beta = rng.uniform(-0.5, 0.5, 3)
        if link.kind == "reciprocal":
            beta[0] = 2.0
        y = 1.0 if family.kind != "gaussian" else rng.standard_normal()
        obs = Observation(x, y)
        np.testing.assert_allclose(
            mle_sample_grad(family, link, obs, beta, intercept=True),
            sign * vi_sample_op(link, obs, beta, intercept=True),
            rtol=1e-10,
            atol=1e-12,
        )


def test_non_canonical_differs():
    obs = Observation([1.0], 2.0)
    beta = np.array([0.3, 0.2])
    vi = vi_sample_op(softplus(), obs, beta, intercept=True)
    mle = mle_sample_grad(poisson(), softplus(), obs, beta, intercept=True)
    assert not np.allclose(vi, mle)


@pytest.mark.parametrize("family, link", [
    (poisson(), softplus()),
    (bernoulli(), logit_sigmoid()),
    (gaussian(), softplus()),
    (exponential(), reciprocal()),
    (bernoulli(), arctan_cdf()),
])
def test_gradient_and_hessian_finite_differences(family, link):
    obs = Observation([0.5, -1.0], 1.0)
    beta = np.array([1.5, 0.2, -0.1])
    h = 1e-6
    grad = mle_sample_grad(family, link, obs, beta, intercept=True)
    hess = mle_sample_hessian(family, link, obs, beta, intercept=True)
    for j in range(beta.size):
        step = np.zeros(beta.size)
        step[j] = h
        up = sample_loss(family, link, obs, beta + step, intercept=True)
        down = sample_loss(family, link, obs, beta - step, intercept=True)
        assert grad[j] == pytest.approx((up - down) / (2 * h), rel=1e-5, abs=1e-8)
        grad_up = mle_sample_grad(family, link, obs, beta + step, intercept=True)
        grad_down = mle_sample_grad(family, link, obs, beta - step, intercept=True)
        np.testing.assert_allclose(hess[:, j], (grad_up - grad_down) / (2 * h), rtol=1e-5, atol=1e-7)


def test_poisson_mean_underflow_is_clamped():
    obs = Observation([1.0], 0.0)
    grad = mle_sample_grad(poisson(), exp_link(), obs, np.array([-800.0]))
    assert np.all(np.isfinite(grad))
