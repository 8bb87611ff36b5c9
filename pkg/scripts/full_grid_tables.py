#!/usr/bin/env python
# coding: utf-8

""" Full benchmark grid for the softplus, log, clipped exponential and mixture links

d in {10, ..., 100}, N in {100, ..., 1000}, k in {20, 50, 100, 200} with 1000
replications per cell, for dense and sparse true parameters. This takes several hours.

Run this script at the command line with:

    ipython -i ~/repos/glmvi/scripts/full_grid_tables.py

"""

# Internal modules
from glmvi.experiment import experiment
from glmvi.experiment.bench import full_grid, run_grid

for beta_star in ["dense", "sparse"]:
    spec = full_grid(beta_star=beta_star)
    df = run_grid(spec, multi_process=True)
    experiment.save_table(
        df, f"full_grid_{beta_star}.csv", {"beta_star": beta_star, "reps": spec.reps}
    )
    # Share of cells where VI has the lower error, by link
    wide = df.pivot_table(index=["link", "d", "N", "k"], columns="method", values="mean")
    print(beta_star, (wide["vi"] < wide["mle"]).groupby("link").mean())
