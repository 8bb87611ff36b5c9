"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Generalized linear model building blocks.

- `glmvi.glm.links` inverse link functions g^-1 and their constants

- `glmvi.glm.families` exponential family losses and the per observation VI
  operator and MLE gradient

- `glmvi.glm.operators` the `Dataset` container, empirical operators over a
  dataset, their Jacobians and the Minty condition diagnostics

    from glmvi.glm.links import parse_link
    from glmvi.glm.families import parse_family
    link, family = parse_link("softplus"), parse_family("poisson")
"""
