"""
Minimum-distance (1-NN) classification over eigen images and PCA features.

The distance between two feature matrices is the sum over columns of the
column-wise Euclidean norms. PCA feature vectors are treated as a single
column, so their distance is the plain Euclidean norm. Vector features carry
the kind they were projected from and only match models of that kind.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence, Tuple, Union

import numpy as np

from bearing_spectra.constants import DEFAULT_CONTRIBUTION, DEFAULT_D
from bearing_spectra.enums import FeatureKind
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.pca_baseline import fit_pca, flatten, project_pca, spectrum_vector
from bearing_spectra.structs import (
    EigenBasis2D,
    EigenImage,
    FaultClass,
    PcaBasis,
    Spectrum,
    SpectrumImage,
    VectorFeature,
)
from bearing_spectra.twodpca import fit_2dpca, project

LOGGER = logging.getLogger(__name__)

Feature = Union[EigenImage, VectorFeature, np.ndarray]
Basis = Union[EigenBasis2D, PcaBasis]


def _as_columns(feature: Feature) -> np.ndarray:
    if isinstance(feature, EigenImage):
        return feature.matrix
    matrix = feature.values if isinstance(feature, VectorFeature) else np.asarray(feature, dtype=np.float64)
    if matrix.ndim == 1:
        return matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        raise DataError(f"Feature must be a vector or a matrix, got shape {matrix.shape}")
    return matrix


def distance(first: Feature, second: Feature) -> float:
    """
    Sum over columns r of ||Y_r(first) - Y_r(second)||_2.
    """
    kinds = {feature.kind for feature in (first, second) if isinstance(feature, VectorFeature)}
    if len(kinds) > 1:
        raise UserInputValidationError(f"Cannot compare features of kinds {sorted(kind.value for kind in kinds)}")
    a, b = _as_columns(first), _as_columns(second)
    if a.shape != b.shape:
        raise DataError(f"Cannot compare features of shapes {a.shape} and {b.shape}")
    return float(np.linalg.norm(a - b, axis=0).sum())


@dataclass(frozen=True)
class Classification:
    """
    Result of a minimum-distance decision.
    """

    label: FaultClass
    index: int
    distance: float


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """
    A fitted basis with the training features and their labels.
    Vector features are stored as single-column matrices.
    """

    kind: FeatureKind
    basis: Basis
    features: np.ndarray
    labels: Tuple[FaultClass, ...]

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        if features.ndim == 2:
            features = features[:, :, None]
        if features.ndim != 3 or features.shape[0] < 1:
            raise UserInputValidationError(f"A model needs at least one training feature, got {features.shape}")
        if len(self.labels) != features.shape[0]:
            raise UserInputValidationError(f"{features.shape[0]} training features but {len(self.labels)} labels")
        expected = EigenBasis2D if self.kind is FeatureKind.EIGEN_IMAGE else PcaBasis
        if not isinstance(self.basis, expected):
            raise UserInputValidationError(f"{self.kind.value} model needs a {expected.__name__}")
        features.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return self.features.shape[0]

    @property
    def label_set(self) -> FrozenSet[FaultClass]:
        return frozenset(self.labels)


def extract_features(
    kind: FeatureKind,
    basis: Basis,
    image: Optional[Union[SpectrumImage, np.ndarray]] = None,
    spectrum: Optional[Union[Spectrum, np.ndarray]] = None,
) -> Feature:
    """
    Feature of one sample for the given kind. Image kinds need ``image``,
    the FFT-amplitude kind needs ``spectrum``.
    """
    if kind is FeatureKind.FFT_AMPLITUDE:
        if spectrum is None:
            raise UserInputValidationError("FFT-amplitude features need a spectrum")
        return VectorFeature(project_pca(spectrum_vector(spectrum), basis), kind)
    if image is None:
        raise UserInputValidationError(f"{kind.value} features need an image")
    if kind is FeatureKind.EIGEN_IMAGE:
        return project(image, basis)
    return VectorFeature(project_pca(flatten(image), basis), kind)


def train_model(
    kind: FeatureKind,
    labels: Sequence[FaultClass],
    images: Optional[Sequence[Union[SpectrumImage, np.ndarray]]] = None,
    spectra: Optional[Sequence[Union[Spectrum, np.ndarray]]] = None,
    d: int = DEFAULT_D,
    contribution: float = DEFAULT_CONTRIBUTION,
) -> TrainedModel:
    """
    Fit the basis of ``kind`` on the pooled training samples and keep their
    features.
    """
    samples = spectra if kind is FeatureKind.FFT_AMPLITUDE else images
    if samples is None or len(samples) == 0:
        raise UserInputValidationError(f"No training samples given for a {kind.value} model")
    if len(samples) != len(labels):
        raise UserInputValidationError(f"{len(samples)} training samples but {len(labels)} labels")
    if kind is FeatureKind.EIGEN_IMAGE:
        basis = fit_2dpca(samples, d)
    elif kind is FeatureKind.PCA_VECTOR:
        basis = fit_pca([flatten(image) for image in samples], contribution)
    else:
        basis = fit_pca([spectrum_vector(spectrum) for spectrum in samples], contribution)
    key = "spectrum" if kind is FeatureKind.FFT_AMPLITUDE else "image"
    features = [_as_columns(extract_features(kind, basis, **{key: sample})) for sample in samples]
    return TrainedModel(kind, basis, np.stack(features), tuple(labels))


def _kind_of(feature: Feature) -> Optional[FeatureKind]:
    if isinstance(feature, EigenImage):
        return FeatureKind.EIGEN_IMAGE
    if isinstance(feature, VectorFeature):
        return feature.kind
    return None


def distances(feature: Feature, model: TrainedModel) -> np.ndarray:
    """Distance from ``feature`` to every training feature, in training order."""
    if len(model) == 0:
        raise UserInputValidationError("Cannot classify against an empty model")
    if _kind_of(feature) is not model.kind:
        raise UserInputValidationError(f"Feature does not match a {model.kind.value} model")
    columns = _as_columns(feature)
    if columns.shape != model.features.shape[1:]:
        raise DataError(f"Feature of shape {columns.shape} does not match model features {model.features.shape[1:]}")
    return np.linalg.norm(model.features - columns[None], axis=1).sum(axis=1)


def classify(feature: Feature, model: TrainedModel) -> Classification:
    """
    Label of the nearest training feature; ties go to the lowest index.
    """
    table = distances(feature, model)
    index = int(np.argmin(table))
    return Classification(model.labels[index], index, float(table[index]))
