#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Test the step schedules, the fixed point solvers and the stochastic approximation

"""

import math
import numpy as np
import pytest

from glmvi.common.errors import DivergenceError, NotConvergedError, ParameterError
from glmvi.estimation.inference import rate_slope, sa_mse_bound
from glmvi.estimation.solvers import (
    constant,
    experiment_decay,
    fixed_point_solve,
    mle_gd_solve,
    parse_schedule,
    residual_ok,
    robbins_monro,
    solve_vi,
    stochastic_approx,
    theoretical_fp,
    vi_fixed_point,
)
from glmvi.experiment.synth import ExperimentConfig, generate
from glmvi.glm.families import Observation, gaussian, poisson
from glmvi.glm.links import clipped_exp, exp_link, identity, link_eval, relu, softplus
from glmvi.glm.operators import Dataset, empirical_vi


def gaussian_data(d=2, N=200, seed=0):
    return generate(ExperimentConfig(d, N, identity(), gaussian(), seed=seed))


def test_schedule_steps():
    assert theoretical_fp(mu=1, lipschitz=1, d=1, M=1).step(0) == 0.25
    assert theoretical_fp(mu=1, lipschitz=1, d=1, M=1).contraction_factor() == 0.75
    assert robbins_monro(mu=2).step(0) == 0.5
    assert robbins_monro(mu=2).step(3) == 0.125
    assert constant(0.1).step(100) == 0.1
    schedule = experiment_decay(0.01, 0.975).with_scale(N=100, d=10)
    assert schedule.step(0) == pytest.approx(0.01 * math.sqrt(10))
    assert schedule.step(2) == pytest.approx(0.01 * math.sqrt(10) * 0.975**2)


def test_schedule_errors():
    with pytest.raises(ParameterError):
        constant(0.0)
    with pytest.raises(ParameterError):
        robbins_monro(mu=-1)
    with pytest.raises(ParameterError):
        experiment_decay().step(0)
    with pytest.raises(ParameterError):
        constant(0.1).contraction_factor()


def test_parse_schedule():
    assert parse_schedule("constant:eta=0.2") == constant(0.2)
    assert parse_schedule("rm:mu=2") == robbins_monro(2.0)
    assert parse_schedule("decay").scale is None
    scaled = parse_schedule("decay:eta0=0.02,rate=0.9", N=400, d=4)
    assert scaled.step(1) == pytest.approx(0.02 * 10 * 0.9)
    with pytest.raises(ParameterError):
        parse_schedule("rm")
    with pytest.raises(ParameterError):
        parse_schedule("newton")
    with pytest.raises(ParameterError):
        parse_schedule("theoretical", link=softplus(), data=gaussian_data())


def test_parse_theoretical_schedule():
    data = gaussian_data()
    schedule = parse_schedule("theoretical", link=identity(), data=data)
    sigma = np.linalg.svd(data.X, compute_uv=False).min()
    assert schedule.mu == pytest.approx(sigma**2 / data.N)
    assert schedule.M == pytest.approx(np.abs(data.X).max())


def test_fixed_point_runs_exactly_T_steps():
    data = gaussian_data()
    trace = vi_fixed_point(identity(), data, np.zeros(2), constant(0.1), T=15)
    assert trace.iterates.shape == (16, 2)
    assert trace.operator_norms.shape == (16,)
    assert trace.wall_iterations == 15
    assert trace.errors_to_target is None
    assert list(trace.to_frame().columns) == ["k", "beta_0", "beta_1", "op_norm"]


def test_fixed_point_stays_at_solution():
    data = gaussian_data()
    beta_hat = solve_vi(identity(), data)
    trace = vi_fixed_point(identity(), data, beta_hat, constant(0.1), T=20, stop_tol=1e-6)
    assert trace.wall_iterations == 0
    np.testing.assert_array_equal(trace.final, beta_hat)


def test_zero_operator_runs_all_iterations():
    # V(0) = mean((0 - y) x) vanishes for y = (1, -1) and x = (1, 1)
    data = Dataset(np.array([[1.0], [1.0]]), np.array([1.0, -1.0]))
    trace = vi_fixed_point(identity(), data, np.zeros(1), constant(0.1), T=10,
                           beta_star=np.zeros(1))
    assert trace.wall_iterations == 10
    np.testing.assert_array_equal(trace.iterates, np.zeros((11, 1)))
    np.testing.assert_array_equal(trace.errors_to_target, np.zeros(11))


def test_theoretical_step_contracts():
    data = gaussian_data()
    beta_hat = solve_vi(identity(), data)
    schedule = parse_schedule("theoretical", link=identity(), data=data)
    trace = vi_fixed_point(identity(), data, np.zeros(2), schedule, T=50)
    distances = np.linalg.norm(trace.iterates - beta_hat, axis=1)
    rate = math.sqrt(schedule.contraction_factor())
    assert np.all(distances[1:] <= rate * distances[:-1] + 1e-10)


def test_canonical_link_traces_coincide():
    data = generate(ExperimentConfig(3, 200, exp_link(), poisson(), seed=3))
    schedule = experiment_decay().with_scale(data.N, data.d)
    vi_trace = vi_fixed_point(exp_link(), data, np.zeros(3), schedule, T=50)
    mle_trace = mle_gd_solve(poisson(), exp_link(), data, np.zeros(3), schedule, T=50)
    np.testing.assert_allclose(vi_trace.iterates, mle_trace.iterates, rtol=1e-10, atol=1e-12)


def test_non_canonical_link_traces_differ():
    data = generate(ExperimentConfig(3, 200, softplus(), poisson(), seed=3))
    schedule = experiment_decay().with_scale(data.N, data.d)
    vi_trace = vi_fixed_point(softplus(), data, np.zeros(3), schedule, T=10)
    mle_trace = mle_gd_solve(poisson(), softplus(), data, np.zeros(3), schedule, T=10)
    assert not np.allclose(vi_trace.final, mle_trace.final)


def test_plateau_of_clipped_link():
    # y sits on the lower clip, every beta <= 0 solves the VI
    link = clipped_exp(1, 5)
    data = Dataset(np.array([[1.0]]), np.array([1.0]))
    trace = vi_fixed_point(link, data, np.array([-2.0]), constant(0.5), T=5)
    np.testing.assert_array_equal(trace.iterates, np.full((6, 1), -2.0))
    assert np.all(trace.operator_norms == 0)
    # Above the upper clip the operator is C - y
    trace = vi_fixed_point(link, data, np.array([3.0]), constant(0.5), T=1)
    np.testing.assert_allclose(trace.final, [1.0])


def test_mle_is_stuck_on_the_clip_while_vi_moves():
    link = clipped_exp(1, 5)
    data = Dataset(np.array([[1.0]]), np.array([1.0]))
    mle_trace = mle_gd_solve(poisson(), link, data, np.array([3.0]), constant(0.5), T=100)
    np.testing.assert_array_equal(mle_trace.iterates, np.full((101, 1), 3.0))
    vi_trace = vi_fixed_point(link, data, np.array([3.0]), constant(0.5), T=10_000,
                              stop_tol=1e-4)
    assert abs(vi_trace.final[0]) <= 1e-3


def test_divergence_keeps_finite_iterates():
    data = Dataset(np.array([[1.0]]), np.array([1.0]))
    with pytest.raises(DivergenceError) as error:
        vi_fixed_point(identity(), data, np.zeros(1), constant(3.0), T=100, beta_star=np.ones(1))
    trace = error.value.trace
    assert trace.diverged
    assert np.all(np.isfinite(trace.iterates))
    assert len(trace.errors_to_target) == len(trace.iterates)
    assert np.abs(trace.iterates).max() <= 1e8


def test_operator_domain_error_is_divergence():
    def log_operator(beta):
        return np.atleast_1d(link_eval(identity(), np.log(beta)))

    with pytest.raises(DivergenceError) as error:
        fixed_point_solve(log_operator, np.array([2.0]), constant(5.0), T=10)
    trace = error.value.trace
    assert trace.iterates.shape == (2, 1)
    assert math.isnan(trace.operator_norms[-1])


def test_fixed_point_is_deterministic():
    data = generate(ExperimentConfig(5, 300, softplus(), poisson(), seed=9))
    schedule = experiment_decay().with_scale(data.N, data.d)
    first = vi_fixed_point(softplus(), data, np.zeros(5), schedule, T=40)
    second = vi_fixed_point(softplus(), data, np.zeros(5), schedule, T=40)
    assert np.array_equal(first.iterates, second.iterates)


def test_stochastic_approx_single_step():
    stream = iter([Observation([1.0], 3.0)])
    trace = stochastic_approx(identity(), stream, np.zeros(1), mu=2, T=1)
    np.testing.assert_allclose(trace.iterates, [[0.0], [1.5]])
    assert trace.wall_iterations == 1
    assert not trace.truncated


def test_stochastic_approx_exact_fit():
    beta_star = np.array([0.5, -1.0])
    rng = np.random.default_rng(0)
    observations = [Observation(x, x @ beta_star) for x in rng.standard_normal((20, 2))]
    trace = stochastic_approx(identity(), iter(observations), beta_star, mu=1, T=20,
                              beta_star=beta_star)
    np.testing.assert_array_equal(trace.errors_to_target, np.zeros(21))


def test_stochastic_approx_truncated_stream():
    observations = [Observation([1.0], 1.0)] * 5
    trace = stochastic_approx(identity(), iter(observations), np.zeros(1), mu=1, T=10)
    assert trace.truncated
    assert trace.wall_iterations == 5
    assert len(trace.iterates) == 6


def test_stochastic_approx_stride():
    observations = (Observation([1.0], 1.0) for _ in range(95))
    trace = stochastic_approx(identity(), observations, np.zeros(1), mu=1, T=95, stride=10)
    assert list(trace.steps) == [0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95]


def noisy_mean_stream(seed, beta_star=0.5):
    rng = np.random.Generator(np.random.Philox(seed))
    while True:
        yield Observation(np.zeros(0), beta_star + rng.uniform(-1, 1))


def test_stochastic_approx_rate():
    """Mean square error decays as 1 / t for the running mean"""
    ts = [100, 1000, 10_000]
    errors = np.zeros((100, len(ts)))
    for rep in range(100):
        trace = stochastic_approx(identity(), noisy_mean_stream(rep), np.zeros(1), mu=1,
                                  T=10_000, intercept=True, beta_star=np.array([0.5]), stride=1)
        errors[rep] = trace.errors_to_target[ts]
    mse = errors.mean(axis=0)
    assert rate_slope(ts, mse) == pytest.approx(-1, abs=0.3)
    for t, value in zip(ts, mse):
        assert value <= sa_mse_bound(R=1.5, M=1, mu=1, d=0, t=t)


def test_solve_vi():
    data = generate(ExperimentConfig(3, 500, softplus(), poisson(), seed=1))
    beta_hat = solve_vi(softplus(), data)
    assert residual_ok(softplus(), data, beta_hat)
    assert np.linalg.norm(empirical_vi(softplus(), data, beta_hat)) <= 1e-8 * (
        1 + np.linalg.norm(beta_hat)
    )


def test_solve_vi_without_zero():
    data = Dataset(np.array([[1.0]]), np.array([-1.0]))
    with pytest.raises(NotConvergedError):
        solve_vi(relu(), data, max_iter=200)
