"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Solvers for the VI estimator and the MLE baseline, and asymptotic inference.

Solve the VI by fixed point iterations with the experiment step schedule and
compare to gradient descent on the mean negative log-likelihood:

    import numpy as np
    from glmvi.estimation.solvers import experiment_decay, vi_fixed_point, mle_gd_solve
    schedule = experiment_decay().with_scale(data.N, data.d)
    vi_trace = vi_fixed_point(link, data, np.zeros(data.p), schedule, T=200)
    mle_trace = mle_gd_solve(family, link, data, np.zeros(data.p), schedule, T=200)

Sandwich covariance of the exact VI solution:

    from glmvi.estimation.solvers import solve_vi
    from glmvi.estimation.inference import vi_sandwich
    beta_hat = solve_vi(link, data)
    vi_sandwich(link, data, beta_hat).sandwich
"""
