#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Exceptions raised by glmvi. Each error also derives from the builtin
exception it specialises, so that code catching `ValueError` or
`ArithmeticError` keeps working.

    from glmvi.common.errors import GlmviError, DivergenceError
    try:
        trace = fixed_point_solve(op, beta0, schedule, T=200)
    except DivergenceError as error:
        partial_trace = error.trace
"""


class GlmviError(Exception):
    """Base error of the glmvi package."""


class DomainError(GlmviError, ValueError):
    """Input outside the domain of a link or loss function."""

    def __init__(self, message, name=None):
        super().__init__(message)
        self.name = name


class KinkError(GlmviError, ValueError):
    """Two sided derivative requested at a point of non differentiability."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ShapeError(GlmviError, ValueError):
    """Dimension mismatch between parameters and covariates."""


class EmptyDatasetError(GlmviError, ValueError):
    """Operation needs at least one observation."""


class ParameterError(GlmviError, ValueError):
    """Parameter out of range or malformed specification string."""


class GenerationError(GlmviError, ValueError):
    """Response sampler received an invalid mean."""

    def __init__(self, message, link=None):
        super().__init__(message)
        self.link = link


class DivergenceError(GlmviError, ArithmeticError):
    """Iterates left the finite region. `trace` keeps the last finite iterates."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class SingularityError(GlmviError, ArithmeticError):
    """Matrix could not be inverted even after ridge regularisation."""


class NotConvergedError(GlmviError, RuntimeError):
    """The solution does not satisfy the residual tolerance."""
