#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Synthetic GLM data: standard normal covariates and responses drawn from the
family with mean g^-1(x' beta_star).

    from glmvi.glm.links import softplus
    from glmvi.glm.families import poisson
    from glmvi.experiment.synth import ExperimentConfig, generate
    config = ExperimentConfig(d=10, N=100, link=softplus(), family=poisson(), seed=3)
    data = generate(config)
    data.to_frame().head()

Every dataset is generated from its own counter based generator (Philox)
seeded with `config.seed`, so replications run in parallel processes produce
the same data as sequential runs. Replication r of an experiment uses the seed
base_seed + r.
"""

# Third party modules
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Tuple, Union
import numpy as np

# Internal modules
from glmvi.common.errors import GenerationError, ParameterError
from glmvi.glm.families import Family, Observation, poisson
from glmvi.glm.links import LinkFunction, link_eval, link_spec, softplus
from glmvi.glm.operators import Dataset

logger = logging.getLogger("glmvi.experiment")


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one synthetic dataset

    :param (int) d, number of covariates
    :param (int) N, number of observations
    :param (LinkFunction) link
    :param (Family) family
    :param beta_star, "dense" (d^-1/2 ones), "sparse" (2/sqrt5, 1/sqrt5, 0...)
        or a custom vector of length d (d + 1 with an intercept)
    :param (bool) intercept, model with an intercept whose true value is 0
        for dense and sparse parameters
    :param (int) seed
    :param (float) noise_sd, standard deviation of gaussian responses
    """

    d: int
    N: int
    link: LinkFunction = softplus()
    family: Family = poisson()
    beta_star: Union[str, Tuple[float, ...]] = "dense"
    intercept: bool = False
    seed: int = 0
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.d < 1 or self.N < 1:
            raise ParameterError(f"Need d >= 1 and N >= 1, got d={self.d}, N={self.N}")
        if isinstance(self.beta_star, str):
            if self.beta_star not in ("dense", "sparse"):
                raise ParameterError(f"Unknown beta_star '{self.beta_star}'")
            if self.beta_star == "sparse" and self.d < 2:
                raise ParameterError("The sparse beta_star needs d >= 2")
        else:
            custom = tuple(float(v) for v in np.ravel(self.beta_star))
            if len(custom) != self.d + int(self.intercept):
                raise ParameterError(
                    f"Custom beta_star has length {len(custom)}, expected"
                    f" {self.d + int(self.intercept)}"
                )
            object.__setattr__(self, "beta_star", custom)
        if not self.noise_sd > 0:
            raise ParameterError("noise_sd must be positive")

    def to_dict(self):
        """JSON friendly description"""
        beta_star = self.beta_star
        if not isinstance(beta_star, str):
            beta_star = list(beta_star)
        return {
            "d": self.d,
            "N": self.N,
            "link": link_spec(self.link),
            "family": self.family.kind,
            "beta_star": beta_star,
            "intercept": self.intercept,
            "seed": self.seed,
            "noise_sd": self.noise_sd,
        }


def make_generator(seed):
    """Counter based generator for one replication"""
    return np.random.Generator(np.random.Philox(seed))


def beta_star_vector(config):
    """True parameter, with a leading 0 intercept when the model has one"""
    if config.beta_star == "dense":
        beta = np.ones(config.d) / math.sqrt(config.d)
    elif config.beta_star == "sparse":
        beta = np.zeros(config.d)
        beta[:2] = (2 / math.sqrt(5), 1 / math.sqrt(5))
    else:
        return np.array(config.beta_star)
    if config.intercept:
        beta = np.concatenate([[0.0], beta])
    return beta


def sample_response(family, link, mean, rng, noise_sd=1.0):
    """Draw responses with the given means

    Poisson counts use numpy's sampler, exact for all rates (inversion for
    small rates, transformed rejection above).
    """
    if not np.all(np.isfinite(mean)):
        raise GenerationError(f"Non finite mean from link {link.kind}", link=link.kind)
    if family.kind == "gaussian":
        return mean + noise_sd * rng.standard_normal(mean.shape)
    if family.kind == "poisson":
        if np.any(mean < 0):
            raise GenerationError(
                f"Negative Poisson mean {mean.min():.4g} from link {link.kind}", link=link.kind
            )
        return rng.poisson(mean).astype(float)
    if family.kind == "bernoulli":
        if np.any((mean < 0) | (mean > 1)):
            raise GenerationError(
                f"Bernoulli mean outside [0, 1] from link {link.kind}", link=link.kind
            )
        return rng.binomial(1, mean).astype(float)
    if np.any(mean <= 0):
        raise GenerationError(
            f"Non positive exponential mean from link {link.kind}", link=link.kind
        )
    return rng.exponential(mean)


def generate(config):
    """Dataset of config.N observations

    :param (ExperimentConfig) config
    :return (Dataset)
    :raise GenerationError when the link produces a mean the family cannot take
    """
    rng = make_generator(config.seed)
    X = rng.standard_normal((config.N, config.d))
    data = Dataset(X, np.zeros(config.N), config.intercept)
    mean = link_eval(config.link, data.design @ beta_star_vector(config))
    y = sample_response(config.family, config.link, mean, rng, config.noise_sd)
    return replace(data, y=y)


def observation_stream(config, size=None):
    """Iterator over fresh observations, endless unless size is given"""
    rng = make_generator(config.seed)
    beta_star = beta_star_vector(config)
    count = 0
    while size is None or count < size:
        x = rng.standard_normal(config.d)
        x_tilde = np.concatenate([[1.0], x]) if config.intercept else x
        mean = np.array([link_eval(config.link, float(x_tilde @ beta_star))])
        y = sample_response(config.family, config.link, mean, rng, config.noise_sd)[0]
        yield Observation(x, y)
        count += 1


def write_dataset(data, config, path):
    """Write the data as CSV and the configuration as a JSON sidecar

    :param (Dataset) data
    :param (ExperimentConfig) config
    :param (Path or str) path, CSV file; the sidecar replaces the suffix with .json
    :return (Path) path of the sidecar
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data.to_frame().to_csv(path, index=False)
    sidecar = path.with_suffix(".json")
    with open(sidecar, "w", encoding="utf-8") as handle:
        json.dump(config.to_dict(), handle, indent=2)
    logger.info("Wrote %s observations to %s", data.N, path)
    return sidecar
