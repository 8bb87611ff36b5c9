#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Test the synthetic data generation

"""

import json
import math
import numpy as np
import pandas
import pytest

from glmvi.common.errors import GenerationError, ParameterError
from glmvi.experiment import experiment
from glmvi.experiment.synth import (
    ExperimentConfig,
    beta_star_vector,
    generate,
    make_generator,
    observation_stream,
    sample_response,
    write_dataset,
)
from glmvi.glm.families import bernoulli, exponential, gaussian, poisson
from glmvi.glm.links import identity, link_eval, logit_sigmoid, neg_exp, softplus
from glmvi.glm.operators import Dataset


def test_config_validation():
    with pytest.raises(ParameterError):
        ExperimentConfig(d=0, N=10)
    with pytest.raises(ParameterError):
        ExperimentConfig(d=2, N=10, beta_star="diagonal")
    with pytest.raises(ParameterError):
        ExperimentConfig(d=1, N=10, beta_star="sparse")
    with pytest.raises(ParameterError):
        ExperimentConfig(d=2, N=10, beta_star=(1.0, 2.0, 3.0))
    with pytest.raises(ParameterError):
        ExperimentConfig(d=2, N=10, noise_sd=0)


def test_beta_star_vector():
    dense = beta_star_vector(ExperimentConfig(d=4, N=10))
    np.testing.assert_allclose(dense, [0.5] * 4)
    assert np.linalg.norm(dense) == pytest.approx(1)
    sparse = beta_star_vector(ExperimentConfig(d=4, N=10, beta_star="sparse"))
    np.testing.assert_allclose(sparse, [2 / math.sqrt(5), 1 / math.sqrt(5), 0, 0])
    with_intercept = beta_star_vector(ExperimentConfig(d=2, N=10, intercept=True))
    assert with_intercept[0] == 0.0 and with_intercept.size == 3
    custom = beta_star_vector(ExperimentConfig(d=2, N=10, beta_star=(0.3, -0.1)))
    np.testing.assert_allclose(custom, [0.3, -0.1])


def test_generate_is_reproducible():
    config = ExperimentConfig(d=3, N=50, seed=11)
    first, second = generate(config), generate(config)
    assert np.array_equal(first.X, second.X)
    assert np.array_equal(first.y, second.y)
    other = generate(ExperimentConfig(d=3, N=50, seed=12))
    assert not np.array_equal(first.X, other.X)


def test_generate_shapes_and_domain():
    data = generate(ExperimentConfig(d=3, N=40, intercept=True))
    assert isinstance(data, Dataset)
    assert (data.N, data.d, data.p) == (40, 3, 4)
    assert np.all(data.y >= 0) and np.all(data.y == np.floor(data.y))
    binary = generate(ExperimentConfig(d=2, N=40, link=logit_sigmoid(), family=bernoulli()))
    assert set(np.unique(binary.y)) <= {0.0, 1.0}
    positive = generate(ExperimentConfig(d=2, N=40, link=neg_exp(), family=exponential()))
    assert np.all(positive.y > 0)


def test_poisson_responses_match_the_mean():
    config = ExperimentConfig(d=2, N=20_000, seed=1)
    data = generate(config)
    mean = link_eval(softplus(), data.X @ beta_star_vector(config))
    standard_error = math.sqrt(mean.mean() / data.N)
    assert abs(data.y.mean() - mean.mean()) <= 4 * standard_error


@pytest.mark.parametrize("z", [-1.0, 0.0, 1.5])
def test_poisson_sampler_at_fixed_rate(z):
    rate = float(link_eval(softplus(), np.array([z]))[0])
    n = 100_000
    y = sample_response(poisson(), softplus(), np.full(n, rate), make_generator(7))
    assert abs(y.mean() - rate) <= 4 * math.sqrt(rate / n)
    assert y.var() == pytest.approx(rate, rel=0.1)


def test_covariate_moments():
    data = generate(ExperimentConfig(d=4, N=10_000, seed=11))
    covariance = np.cov(data.X, rowvar=False)
    assert np.abs(covariance - np.eye(4)).max() <= 0.1


def test_gaussian_noise_scale():
    config = ExperimentConfig(d=1, N=20_000, link=identity(), family=gaussian(), noise_sd=2.0)
    data = generate(config)
    residuals = data.y - data.X[:, 0]
    assert residuals.std() == pytest.approx(2.0, rel=0.05)


def test_invalid_means():
    with pytest.raises(GenerationError) as error:
        generate(ExperimentConfig(d=2, N=100, link=identity(), family=poisson()))
    assert error.value.link == "identity"
    with pytest.raises(GenerationError):
        sample_response(bernoulli(), softplus(), np.array([1.5]), make_generator(0))
    with pytest.raises(GenerationError):
        sample_response(poisson(), softplus(), np.array([np.nan]), make_generator(0))


def test_observation_stream():
    config = ExperimentConfig(d=3, N=1, seed=5)
    observations = list(observation_stream(config, size=4))
    assert len(observations) == 4
    assert observations[0].x.shape == (3,)
    again = list(observation_stream(config, size=4))
    assert all(np.array_equal(a.x, b.x) and a.y == b.y for a, b in zip(observations, again))


def test_write_dataset(tmp_path):
    config = ExperimentConfig(d=2, N=15, seed=2)
    data = generate(config)
    sidecar = write_dataset(data, config, tmp_path / "data" / "sample.csv")
    df = pandas.read_csv(tmp_path / "data" / "sample.csv")
    assert list(df.columns) == ["x_1", "x_2", "y"]
    np.testing.assert_allclose(df["y"], data.y)
    with open(sidecar, encoding="utf-8") as handle:
        metadata = json.load(handle)
    assert metadata["link"] == "softplus"
    assert metadata["family"] == "poisson"
    assert metadata["seed"] == 2


def test_save_table(tmp_path):
    df = pandas.DataFrame({"k": [1, 2], "err": [0.5, 0.25]})
    path = experiment.save_table(df, tmp_path / "errors.csv", {"reps": 3})
    pandas.testing.assert_frame_equal(pandas.read_csv(path), df)
    assert json.loads((tmp_path / "errors.json").read_text()) == {"reps": 3}
