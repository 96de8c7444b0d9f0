"""
Flattened-vector PCA baseline with contribution-based truncation.

When vectors are longer than the sample count the eigenpairs come from the
M x M Gram matrix and are mapped back to p-dimensional components.
"""

import logging
from typing import Sequence, Union

import numpy as np

from bearing_spectra.constants import DEFAULT_CONTRIBUTION
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.spectrum_image import normalized_amplitudes
from bearing_spectra.structs import PcaBasis, Spectrum, SpectrumImage
from bearing_spectra.twodpca import eigen_sorted

LOGGER = logging.getLogger(__name__)

# eigenvalues below this fraction of the largest count as zero
RANK_TOLERANCE = 1e-10
# slack on the cumulative ratio so that contribution 1.0 stops at the rank
RATIO_SLACK = 1e-12


def flatten(image: Union[SpectrumImage, np.ndarray]) -> np.ndarray:
    """Row-major concatenation of an image's rows."""
    matrix = image.matrix() if isinstance(image, SpectrumImage) else np.asarray(image, dtype=np.float64)
    return matrix.reshape(-1)


def spectrum_vector(spectrum: Union[Spectrum, np.ndarray]) -> np.ndarray:
    """512-bin magnitude spectrum scaled by its own maximum."""
    return normalized_amplitudes(spectrum)


def select_components(eigenvalues: np.ndarray, contribution: float) -> int:
    """Smallest k whose leading eigenvalues reach the requested share of the total."""
    if not 0 < contribution <= 1:
        raise UserInputValidationError(f"Contribution must be in (0, 1], got {contribution}")
    total = eigenvalues.sum()
    if total <= 0:
        return 1
    ratios = np.cumsum(eigenvalues) / total
    k = int(np.searchsorted(ratios, contribution - RATIO_SLACK, side="left")) + 1
    return min(k, eigenvalues.size)


def fit_pca(samples: Sequence[np.ndarray], contribution: float = DEFAULT_CONTRIBUTION) -> PcaBasis:
    """
    Fit PCA on M vectors with covariance normalized by 1/M.
    """
    data = np.asarray(samples, dtype=np.float64)
    if data.ndim != 2:
        raise DataError(f"PCA samples must be equal-length vectors, got shape {data.shape}")
    m, p = data.shape
    if m < 2:
        raise UserInputValidationError(f"PCA needs at least 2 samples, got {m}")
    if not 0 < contribution <= 1:
        raise UserInputValidationError(f"Contribution must be in (0, 1], got {contribution}")
    mean = data.mean(axis=0)
    centered = data - mean

    if p > m:
        gram = centered @ centered.T / m
        values, vectors = eigen_sorted((gram + gram.T) / 2)
    else:
        covariance = centered.T @ centered / m
        values, vectors = eigen_sorted((covariance + covariance.T) / 2)

    # rounding in the mean leaves centered entries of order eps * scale
    noise_floor = 16 * p * (np.finfo(np.float64).eps * max(1.0, float(np.abs(data).max()))) ** 2
    if values[0] <= noise_floor:
        LOGGER.warning("All %d PCA samples are identical; using an arbitrary unit component", m)
        components = np.zeros((p, 1))
        components[0, 0] = 1.0
        return PcaBasis(mean, components, np.zeros(1), contribution)

    keep = values > RANK_TOLERANCE * values[0]
    values = values[keep]
    if p > m:
        components = centered.T @ vectors[:, keep] / np.sqrt(m * values)
    else:
        components = vectors[:, keep]
    k = select_components(values, contribution)
    LOGGER.debug("PCA on %d x %d samples keeps %d of %d components at %.0f%%", m, p, k, values.size, contribution * 100)
    return PcaBasis(mean, components[:, :k], values, contribution)


def project_pca(vector: np.ndarray, basis: PcaBasis) -> np.ndarray:
    """Feature vector components^T (vector - mean)."""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (basis.p,):
        raise DataError(f"Vector of shape {vector.shape} does not match a basis of length {basis.p}")
    return basis.components.T @ (vector - basis.mean_vector)
