#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Linear algebra helpers used by the operators and the inference code.

Averages over observations go through `tree_sum`, a pairwise reduction with a
fixed order. Results are bit identical from one run to the next whatever the
number of BLAS threads.

    import numpy as np
    from glmvi.common.linalg import row_mean, weighted_gram, robust_inverse
    design = np.random.default_rng(0).standard_normal((100, 3))
    jac = weighted_gram(design, np.ones(100))
    robust_inverse(jac)
"""

# Third party modules
import logging
import numpy as np
from scipy import linalg

# Internal modules
from glmvi.common.errors import SingularityError

# Inverse of a matrix whose condition number exceeds this gets a ridge
COND_LIMIT = 1e12
# Ridge added, relative to the mean eigenvalue magnitude
RIDGE = 1e-8

logger = logging.getLogger("glmvi.common")


def tree_sum(values):
    """Sum along the first axis by pairwise halving

    :param (array) values, array of shape (N, ...)
    :return (array) sum of shape (...)
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] == 0:
        return np.zeros(values.shape[1:])
    while values.shape[0] > 1:
        half = values.shape[0] // 2
        paired = values[:half] + values[half : 2 * half]
        # Odd length: the last row is carried to the next level
        if values.shape[0] % 2:
            paired = np.concatenate([paired, values[-1:]])
        values = paired
    return values[0]


def row_mean(values):
    """Mean along the first axis, see `tree_sum`"""
    values = np.asarray(values, dtype=float)
    return tree_sum(values) / values.shape[0]


def symmetrize(matrix):
    """Exactly symmetric version of a square matrix"""
    return (matrix + matrix.T) / 2


def weighted_gram(design, weights):
    """Mean of weighted outer products (1/N) sum w_i x_i x_i'

    :param (array) design, (N, p) matrix of rows x_i
    :param (array) weights, (N,) weights w_i
    :return (array) symmetric (p, p) matrix
    """
    outer = np.einsum("ni,nj->nij", design * weights[:, None], design)
    return symmetrize(row_mean(outer))


def robust_inverse(matrix, cond_limit=COND_LIMIT, ridge=RIDGE):
    """Inverse of a symmetric matrix, see `ridge_inverse`"""
    return ridge_inverse(matrix, cond_limit, ridge)[0]


def ridge_inverse(matrix, cond_limit=COND_LIMIT, ridge=RIDGE):
    """Inverse of a symmetric matrix through its eigen decomposition

    When the condition number exceeds `cond_limit`, a ridge equal to
    `ridge` times trace / dimension is added to the eigenvalues.

    :param (array) matrix, symmetric (p, p) matrix
    :return (tuple) symmetric inverse and the ridge used (0 if none)
    :raise SingularityError when the ridge does not restore conditioning
    """
    matrix = symmetrize(np.asarray(matrix, dtype=float))
    if not np.all(np.isfinite(matrix)):
        raise SingularityError("Matrix to invert has non finite entries")
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    shift = 0.0
    magnitudes = np.abs(eigenvalues)
    if magnitudes.min() * cond_limit < magnitudes.max() or magnitudes.max() == 0:
        shift = ridge * np.trace(matrix) / matrix.shape[0]
        logger.warning(
            "Condition number above %.0e, adding a ridge of %.3e", cond_limit, shift
        )
        eigenvalues = eigenvalues + shift
        magnitudes = np.abs(eigenvalues)
        if magnitudes.max() == 0 or magnitudes.min() * cond_limit < magnitudes.max():
            raise SingularityError(
                f"Matrix is singular beyond the ridge, eigenvalues {eigenvalues}"
            )
    inverse = (eigenvectors / eigenvalues) @ eigenvectors.T
    return symmetrize(inverse), shift


def sandwich(bread, filling):
    """Sandwich product B^-1 S B^-T, symmetrized

    :param (array) bread, symmetric (p, p) Jacobian or Hessian
    :param (array) filling, (p, p) covariance of the estimating equation
    :return (tuple) sandwich matrix and the ridge used to invert the bread
    """
    bread_inv, shift = ridge_inverse(bread)
    return symmetrize(bread_inv @ filling @ bread_inv.T), shift


def inverse_sqrt_psd(matrix):
    """Symmetric inverse square root of a positive definite matrix"""
    eigenvalues, eigenvectors = linalg.eigh(symmetrize(matrix))
    eigenvalues = np.clip(eigenvalues, np.finfo(float).tiny, None)
    return symmetrize((eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.T)


def min_singular_value(design):
    """Smallest singular value of a (N, p) matrix, 0 when N < p"""
    n_rows, n_cols = design.shape
    if n_rows < n_cols or n_cols == 0:
        return 0.0
    return float(linalg.svdvals(design).min())
