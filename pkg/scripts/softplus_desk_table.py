#!/usr/bin/env python
# coding: utf-8

""" Mean squared error of VI and MLE with the softplus link on a small grid

Compare the VI fixed point iterations and MLE gradient descent after 20, 50, 100 and
200 iterations for d in {10, 20} and N in {100, 1000}. Each cell averages 200
replications.

Run this script at the command line with:

    ipython -i ~/repos/glmvi/scripts/softplus_desk_table.py

The table is written to the `experiment` folder of the glmvi data directory.
"""

# Internal modules
from glmvi.experiment import experiment
from glmvi.experiment.bench import desk_grid, run_grid

spec = desk_grid(reps=200)
df = run_grid(spec, multi_process=True)

# Wide table with one column per method
wide = df.pivot_table(index=["d", "N", "k"], columns="method", values="mean")
wide["vi_better"] = wide["vi"] < wide["mle"]
print(wide)

experiment.save_table(df, "softplus_desk.csv", {"reps": spec.reps, "links": ["softplus"]})
