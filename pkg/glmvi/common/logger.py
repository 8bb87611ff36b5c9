#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Adapted from https://docs.python.org/3/howto/logging-cookbook.html

Create a glmvi logger with file handler:

    from glmvi.common.logger import create_logger
    create_logger()

This logger can be then used directly using only the logging module itself from
any sub module or script:

    import logging
    logger = logging.getLogger("glmvi.estimation")
    logger.info("Fixed point run finished after %s iterations", 200)
"""

# Third party modules
import logging

# Internal modules
import glmvi


def create_logger():
    """Create a logger to keep track of debug and error messages"""
    # create logger with 'glmvi'
    logger = logging.getLogger("glmvi")
    # If it exists already it will just be reused
    if logger.hasHandlers():
        return
    # Set level
    logger.setLevel(logging.DEBUG)
    path = glmvi.log_dir
    # Unattended runs, create the directory without asking
    path.mkdir(parents=True, exist_ok=True)
    # create file handler which logs even debug messages
    fh = logging.FileHandler(path / "glmvi.log")
    fh.setLevel(logging.DEBUG)
    # create console handler, the debug stream stays in the file
    ch = logging.StreamHandler()
    ch.setLevel(logging.INFO)
    # create formatter and add it to the handlers
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    fh.setFormatter(formatter)
    ch.setFormatter(formatter)
    # add the handlers to the logger
    logger.addHandler(fh)
    logger.addHandler(ch)
    logger.info("Created a logger with file handler %s.", str(path / "glmvi.log"))
