#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

The `glmvi` package estimates generalized linear models by solving a
variational inequality (VI) instead of minimizing a negative log-likelihood.
The VI estimator is the zero of the monotone operator

    V_N(beta) = mean over i of (g^-1(x_i' beta) - y_i) x_i

and it can be reached by plain fixed point iterations whenever the inverse
link is monotone. It is compared to maximum likelihood estimation (MLE) on
simulated Poisson regression data.

The package is structured into sub-packages:

- `glmvi.glm` inverse link functions, response families and the empirical
  operators (VI operator, MLE gradient, Jacobians, Minty diagnostics).

- `glmvi.estimation` fixed point and stochastic approximation solvers,
  step size schedules and asymptotic inference (sandwich covariances,
  finite sample bounds, coverage checks).

- `glmvi.experiment` synthetic data generation and the Monte Carlo benchmark
  comparing VI and MLE accuracy on a grid of links, dimensions, sample sizes
  and iteration budgets.

- `glmvi.common` logging, errors and linear algebra helpers.

The `glmvi` command line wraps the main entry points, see `glmvi --help`.


# Paths defined for glmvi data

 - `module_dir` is the location of the installed package.

 - `data_dir` is where experiment outputs (CSV tables, JSON sidecars) are
   written. By default it is "$HOME/repos/glmvi_data/" but this can be changed
   with the environment variable GLMVI_DATA. The directory is created on first
   use.

 - The log file `glmvi.log` is written to `data_dir` unless the environment
   variable GLMVI_LOG points to another directory.

You can display these values with:

    import glmvi
    print("module_dir:", glmvi.module_dir)
    print("data_dir:", glmvi.data_dir)

"""

from pathlib import Path
import os

__version__ = "0.1.0"

module_dir = Path(__file__).resolve().parent

# Where is the data, default case
data_dir = Path.home() / "repos/glmvi_data/"

# But you can override that with an environment variable
if os.environ.get("GLMVI_DATA"):
    data_dir = Path(os.environ["GLMVI_DATA"])

# Log directory, same as the data unless overridden
log_dir = data_dir
if os.environ.get("GLMVI_LOG"):
    log_dir = Path(os.environ["GLMVI_LOG"])
