"""
Two-dimensional PCA on image matrices.

The scatter matrix is accumulated over centered images while the projection
of a single image uses the raw image, as the method defines it.
"""

import logging
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from bearing_spectra.constants import DEFAULT_D, EIGEN_TOLERANCE, SYMMETRY_TOLERANCE
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.structs import EigenBasis2D, EigenImage, SpectrumImage

LOGGER = logging.getLogger(__name__)

ImageLike = Union[SpectrumImage, np.ndarray]


def _as_matrix(image: ImageLike) -> np.ndarray:
    if isinstance(image, SpectrumImage):
        return image.matrix()
    return np.asarray(image, dtype=np.float64)


def stack_images(samples: Sequence[ImageLike]) -> np.ndarray:
    """Stack images into an (M, rows, cols) float64 array, checking shapes."""
    if isinstance(samples, np.ndarray) and samples.ndim == 3:
        if samples.shape[0] < 1:
            raise UserInputValidationError("At least one training image is required")
        return samples.astype(np.float64, copy=False)
    if len(samples) < 1:
        raise UserInputValidationError("At least one training image is required")
    matrices = [_as_matrix(image) for image in samples]
    shape = matrices[0].shape
    for index, matrix in enumerate(matrices):
        if matrix.ndim != 2 or matrix.shape != shape:
            raise DataError(f"Image {index} has shape {matrix.shape}, expected {shape}")
    return np.stack(matrices)


def mean_image(samples: Sequence[ImageLike]) -> np.ndarray:
    """Elementwise mean of the training images."""
    return stack_images(samples).mean(axis=0)


def scatter_matrix(samples: Sequence[ImageLike]) -> np.ndarray:
    """
    G = (1/M) sum_j (A_j - mean)^T (A_j - mean), an h x h symmetric PSD matrix.
    """
    stack = stack_images(samples)
    m, _, cols = stack.shape
    deviations = (stack - stack.mean(axis=0)).reshape(-1, cols)
    scatter = deviations.T @ deviations / m
    return (scatter + scatter.T) / 2


def _orient(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its first non-negligible entry is positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        column = out[:, k]
        significant = np.flatnonzero(np.abs(column) > 1e-12)
        if significant.size and column[significant[0]] < 0:
            out[:, k] = -column
    return out


def eigen_sorted(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    All eigenpairs of a symmetric matrix, eigenvalues descending. Column k of
    the returned matrix is the unit eigenvector of eigenvalue k.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise UserInputValidationError(f"Expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DataError("Matrix contains non-finite entries")
    scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
    asymmetry = float(np.abs(matrix - matrix.T).max(initial=0.0))
    if asymmetry > SYMMETRY_TOLERANCE * scale:
        raise UserInputValidationError(f"Matrix is not symmetric (max |G - G^T| = {asymmetry:.3e})")
    values, vectors = linalg.eigh(matrix)
    order = np.argsort(-values, kind="stable")
    return values[order], _orient(vectors[:, order])


def fit_2dpca(samples: Sequence[ImageLike], d: int = DEFAULT_D) -> EigenBasis2D:
    """
    Fit the projection basis: mean image, scatter eigenvalues and the first d
    eigenvectors.
    """
    stack = stack_images(samples)
    h = stack.shape[2]
    if not 1 <= d < h:
        raise UserInputValidationError(f"Projection dimension d must satisfy 1 <= d < {h}, got {d}")
    values, vectors = eigen_sorted(scatter_matrix(stack))
    if values[0] <= EIGEN_TOLERANCE:
        LOGGER.warning("Scatter matrix of %d training images is zero; basis is arbitrary", stack.shape[0])
    LOGGER.debug("2DPCA fit on %d images, leading eigenvalues %s", stack.shape[0], values[:d])
    return EigenBasis2D(stack.mean(axis=0), values, vectors[:, :d])


def project(image: ImageLike, basis: EigenBasis2D) -> EigenImage:
    """
    Eigen image E = B U of a raw image B.
    """
    matrix = _as_matrix(image)
    if matrix.ndim != 2 or matrix.shape[1] != basis.h:
        raise DataError(f"Image of shape {matrix.shape} does not match a basis of height {basis.h}")
    label = image.label if isinstance(image, SpectrumImage) else None
    return EigenImage(matrix @ basis.basis, label)
