#!/usr/bin/env python
# coding: utf-8

""" Squared error trajectories of VI and MLE for non canonical links

For the clipped exponential link both trajectories coincide until the linear predictor
reaches the clip, then the MLE stalls. For the Gaussian mixture link the MLE can
oscillate. The mean error curves average 100 replications.

Run this script at the command line with:

    ipython -i ~/repos/glmvi/scripts/trajectories.py

"""

# Internal modules
from glmvi.estimation.solvers import experiment_decay
from glmvi.experiment import experiment
from glmvi.experiment.bench import error_curve, trajectory_frame, trajectory_run, trend_report
from glmvi.glm.links import clipped_exp, exp_link, gmm_cdf, link_spec

d, N, T = 20, 400, 200
schedule = experiment_decay()

for link in [exp_link(), clipped_exp(0, 2), gmm_cdf()]:
    name = link_spec(link).split(":")[0]
    # One dataset
    vi_trace, mle_trace = trajectory_run(link, d, N, schedule, seed=1, T=T)
    df = trajectory_frame(vi_trace, mle_trace, T)
    print(name, "\n", trend_report(df))
    experiment.save_table(df, f"trajectory_{name}.csv")
    # Average over replications
    curve = error_curve(link, d, N, schedule, reps=100, T=T, multi_process=True)
    experiment.save_table(curve, f"error_curve_{name}.csv")
