#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Simulation experiments comparing the VI estimator to the MLE.

Generate a dataset, run the benchmark grid and store the results in the
glmvi data directory:

    from glmvi.experiment import experiment
    from glmvi.experiment.bench import desk_grid, run_grid
    df = run_grid(desk_grid(), multi_process=True)
    experiment.save_table(df, "softplus_desk.csv", {"reps": 200})

Display where outputs are written:

    experiment.data_dir

"""
# Third party modules
import json
import logging
from pathlib import Path

# Internal modules
from glmvi import data_dir

# Define a logging mechanism to keep track of errors and debug messages
from glmvi.common.logger import create_logger

create_logger()


class Experiment:
    """
    Parent to the experiment outputs
    """

    # Location of the data
    data_dir = data_dir / "experiment"

    logger = logging.getLogger("glmvi.experiment")

    def output_path(self, name):
        """Path of an output file, relative names go to `data_dir`"""
        path = Path(name)
        if not path.is_absolute() and path.parent == Path("."):
            path = self.data_dir / path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def save_table(self, df, name, metadata=None):
        """Write a data frame as CSV with an optional JSON sidecar

        :param (DataFrame) df
        :param (str or Path) name, file name or path of the CSV file
        :param (dict) metadata, written next to the CSV with a .json suffix
        :return (Path) the CSV path
        """
        path = self.output_path(name)
        df.to_csv(path, index=False)
        if metadata is not None:
            with open(path.with_suffix(".json"), "w", encoding="utf-8") as handle:
                json.dump(metadata, handle, indent=2)
        self.logger.info("Wrote %s rows to %s", len(df), path)
        return path


# Make a singleton #
experiment = Experiment()
