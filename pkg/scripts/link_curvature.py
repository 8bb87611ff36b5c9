#!/usr/bin/env python
# coding: utf-8

""" Curvature of the VI operator and of the MLE gradient with the softplus link

The Jacobian of the VI operator weights x x' by sigmoid(z), the Hessian of the Poisson
MLE loss at the truth weights it by sigmoid(z)^2 / softplus(z). Their ratio
softplus(z) / sigmoid(z) grows linearly for large z.

Run this script at the command line with:

    ipython -i ~/repos/glmvi/scripts/link_curvature.py

"""

import numpy as np
import pandas

# Internal modules
from glmvi.experiment import experiment
from glmvi.glm.links import link_deriv, link_eval, logit_sigmoid, softplus, softplus_curvature_ratio

z = np.linspace(-5, 30, 141)
df = pandas.DataFrame(
    {
        "z": z,
        "softplus": link_eval(softplus(), z),
        "sigmoid": link_eval(logit_sigmoid(), z),
        "softplus_deriv": link_deriv(softplus(), z),
        "ratio": softplus_curvature_ratio(z),
    }
)
print(df.iloc[::20])
experiment.save_table(df, "softplus_curvature.csv")
