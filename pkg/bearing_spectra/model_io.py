"""
Persistence of bases, trained models and CSV manifests.

Models are versioned ``.npz`` archives; every array is stored at full
precision so a write-then-read round trip is exact.
"""

import logging
import zipfile
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from bearing_spectra.classifier import Basis, TrainedModel
from bearing_spectra.constants import MODEL_FORMAT_VERSION, MODEL_MAGIC
from bearing_spectra.enums import FaultType, FeatureKind, LoadCondition
from bearing_spectra.exceptions import DataError, ModelFormatError, UserInputValidationError
from bearing_spectra.structs import EigenBasis2D, FaultClass, PcaBasis

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _basis_arrays(basis: Basis) -> Dict[str, np.ndarray]:
    if isinstance(basis, EigenBasis2D):
        return {
            "basis_type": np.array("2dpca"),
            "mean_image": basis.mean_image,
            "eigenvalues": basis.eigenvalues,
            "basis": basis.basis,
        }
    return {
        "basis_type": np.array("pca"),
        "mean_vector": basis.mean_vector,
        "components": basis.components,
        "eigenvalues": basis.eigenvalues,
        "contribution": np.array(basis.contribution),
    }


def _basis_from_arrays(arrays) -> Basis:
    basis_type = str(arrays["basis_type"])
    if basis_type == "2dpca":
        return EigenBasis2D(arrays["mean_image"], arrays["eigenvalues"], arrays["basis"])
    if basis_type == "pca":
        return PcaBasis(
            arrays["mean_vector"], arrays["components"], arrays["eigenvalues"], float(arrays["contribution"])
        )
    raise ModelFormatError(f"Unknown basis type {basis_type!r}")


def _write(path: PathLike, arrays: Dict[str, np.ndarray]) -> Path:
    path = Path(path)
    header = {"magic": np.array(MODEL_MAGIC), "format_version": np.array(MODEL_FORMAT_VERSION)}
    try:
        with open(path, "wb") as f:
            np.savez(f, **header, **arrays)
    except OSError as error:
        raise DataError(f"Cannot write model file {path}: {error}") from error
    return path


def _read(path: PathLike) -> Dict[str, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"Model file not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
    except (OSError, ValueError, zipfile.BadZipFile) as error:
        raise ModelFormatError(f"{path} is not a model file: {error}") from error
    if "magic" not in arrays or str(arrays["magic"]) != MODEL_MAGIC:
        raise ModelFormatError(f"{path} is not a model file")
    version = int(arrays["format_version"])
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"{path} has format version {version}, expected {MODEL_FORMAT_VERSION}")
    return arrays


def save_basis(basis: Basis, path: PathLike) -> Path:
    """Persist a 2DPCA or PCA basis."""
    return _write(path, _basis_arrays(basis))


def load_basis(path: PathLike) -> Basis:
    """Read a basis written by :func:`save_basis` or :func:`save_model`."""
    try:
        return _basis_from_arrays(_read(path))
    except KeyError as error:
        raise ModelFormatError(f"{path} is missing field {error}") from error


def _encode_labels(labels: Sequence[FaultClass]) -> Dict[str, np.ndarray]:
    return {
        "label_types": np.array([label.fault_type.value for label in labels]),
        "label_sizes": np.array([np.nan if label.fault_size is None else label.fault_size for label in labels]),
    }


def _decode_labels(types: np.ndarray, sizes: np.ndarray) -> List[FaultClass]:
    return [
        FaultClass(FaultType(str(kind)), None if np.isnan(size) else float(size)) for kind, size in zip(types, sizes)
    ]


def save_model(model: TrainedModel, path: PathLike) -> Path:
    """
    Persist a trained model: kind, basis, training features and labels.
    """
    arrays = {
        "kind": np.array(model.kind.value),
        **_basis_arrays(model.basis),
        "features": model.features,
        **_encode_labels(model.labels),
    }
    path = _write(path, arrays)
    LOGGER.info("Saved %s model with %d training features to %s", model.kind.value, len(model), path)
    return path


def load_model(path: PathLike) -> TrainedModel:
    """Read a model written by :func:`save_model`."""
    arrays = _read(path)
    try:
        kind = FeatureKind(str(arrays["kind"]))
        labels = _decode_labels(arrays["label_types"], arrays["label_sizes"])
        return TrainedModel(kind, _basis_from_arrays(arrays), arrays["features"], tuple(labels))
    except KeyError as error:
        raise ModelFormatError(f"{path} is missing field {error}") from error
    except (ValueError, UserInputValidationError) as error:
        raise ModelFormatError(f"{path} holds an inconsistent model: {error}") from error


def write_manifest(rows: Sequence[Dict], path: PathLike, columns: Sequence[str]) -> Path:
    """Write a CSV manifest with the given column order."""
    path = Path(path)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    try:
        frame.to_csv(path, index=False)
    except OSError as error:
        raise DataError(f"Cannot write manifest {path}: {error}") from error
    return path


def read_manifest(path: PathLike, columns: Sequence[str]) -> pd.DataFrame:
    """
    Read a CSV manifest, checking its columns. Relative paths are resolved
    against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Manifest not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={"path": str, "fault_type": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
        raise DataError(f"Cannot parse manifest {path}: {error}") from error
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise DataError(f"Manifest {path} lacks columns {missing}")
    frame["path"] = [str(p) if Path(p).is_absolute() else str(path.parent / p) for p in frame["path"]]
    return frame


def manifest_label(row) -> FaultClass:
    """Fault class of a manifest row."""
    try:
        return FaultClass.parse(row["fault_type"], row["fault_size"])
    except (ValueError, UserInputValidationError) as error:
        raise DataError(f"Bad fault label in manifest row: {dict(row)}") from error


def manifest_load(row) -> LoadCondition:
    """Load condition of a manifest row."""
    try:
        return LoadCondition(int(row["load"]))
    except ValueError as error:
        raise DataError(f"Bad load index in manifest row: {dict(row)}") from error
