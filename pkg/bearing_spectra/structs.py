"""
Value objects for the bearing_spectra package.

All array fields are made read-only on construction so instances can be shared
between concurrent repetitions.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from bearing_spectra.constants import (
    CHARACTERISTIC_ORDERS,
    DEFAULT_SAMPLE_RATE,
    EIGEN_TOLERANCE,
    FAULT_SIZES,
    IMAGE_COLS,
    IMAGE_ROWS,
    RESONANCES,
    SPECTRUM_BINS,
)
from bearing_spectra.enums import FaultType, FeatureKind, LoadCondition
from bearing_spectra.exceptions import DataError, UserInputValidationError


def _frozen(array, dtype=np.float64) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FaultClass:
    """
    Bearing condition label: fault type plus fault size in inches (None for NO).
    """

    fault_type: FaultType
    fault_size: Optional[float] = None

    def __post_init__(self):
        if self.fault_type is FaultType.NO:
            if self.fault_size is not None:
                raise UserInputValidationError(f"Normal bearings carry no fault size, got {self.fault_size}")
            return
        if self.fault_size is None or not any(math.isclose(self.fault_size, s) for s in FAULT_SIZES):
            raise UserInputValidationError(
                f"Fault size for {self.fault_type.value} must be one of {FAULT_SIZES}, got {self.fault_size}"
            )

    @classmethod
    def parse(cls, fault_type: str, fault_size=None) -> "FaultClass":
        """Build from manifest text, where a NO row has an empty or NaN size."""
        kind = FaultType(str(fault_type).strip().upper())
        size = None
        if kind is not FaultType.NO and fault_size is not None and str(fault_size).strip() not in ("", "nan"):
            size = float(fault_size)
        return cls(kind, size)

    def __str__(self):
        if self.fault_size is None:
            return self.fault_type.value
        return f"{self.fault_type.value}-{self.fault_size:.3f}"


@dataclass(frozen=True, eq=False)
class Signal:
    """
    Uniformly sampled vibration record.
    """

    samples: np.ndarray
    sample_rate: float
    label: FaultClass
    load: LoadCondition

    def __post_init__(self):
        samples = _frozen(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise DataError(f"Signal samples must be a non-empty 1-D sequence, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise DataError(f"Signal sample {bad} is not finite")
        if not self.sample_rate > 0:
            raise UserInputValidationError(f"Sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class SynthParams:
    """
    Parameters of the synthetic bearing vibration generator. Each fault type
    rings its own structural resonance; the remaining fields are shared.
    """

    sample_rate: float = DEFAULT_SAMPLE_RATE
    orders: Dict[FaultType, float] = field(default_factory=lambda: dict(CHARACTERISTIC_ORDERS))
    resonances: Dict[FaultType, float] = field(default_factory=lambda: dict(RESONANCES))
    decay: float = 1500.0
    impulse_amplitude: float = 1.0
    noise_std: float = 0.05
    jitter: float = 0.005
    modulation_depth: float = 0.5
    shaft_harmonics: Tuple[float, ...] = (1.0, 0.5, 0.3)

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise UserInputValidationError(f"Sample rate must be positive, got {self.sample_rate}")
        for name in ("decay", "impulse_amplitude", "noise_std", "modulation_depth"):
            if getattr(self, name) < 0:
                raise UserInputValidationError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("orders", "resonances"):
            missing = [fault.value for fault in CHARACTERISTIC_ORDERS if fault not in getattr(self, name)]
            if missing:
                raise UserInputValidationError(f"{name} lacks fault types {missing}")
        if any(order < 0 for order in self.orders.values()) or any(a < 0 for a in self.shaft_harmonics):
            raise UserInputValidationError("Characteristic orders and harmonic amplitudes must be non-negative")
        if not 0.0 <= self.jitter <= 0.05:
            raise UserInputValidationError(f"Jitter fraction must be in [0, 0.05], got {self.jitter}")
        for fault_type, resonance in self.resonances.items():
            if not 0 < resonance < self.sample_rate / 2:
                raise UserInputValidationError(
                    f"{fault_type.value} resonance {resonance} Hz is outside (0, {self.sample_rate / 2}) Hz"
                )


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Single-sided magnitude spectrum of a 1024-point window.
    """

    magnitudes: np.ndarray
    bin_width: float

    def __post_init__(self):
        magnitudes = _frozen(self.magnitudes)
        if magnitudes.shape != (SPECTRUM_BINS,):
            raise DataError(f"Spectrum must have {SPECTRUM_BINS} bins, got shape {magnitudes.shape}")
        if not np.all(np.isfinite(magnitudes)) or np.any(magnitudes < 0):
            raise DataError("Spectrum magnitudes must be finite and non-negative")
        object.__setattr__(self, "magnitudes", magnitudes)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(SPECTRUM_BINS) * self.bin_width


@dataclass(frozen=True, eq=False)
class SpectrumImage:
    """
    Grayscale image with pixels in [0, 1]. Rendered images are stored as
    uint8 0/1 bitmaps, images read back from disk as float64.
    """

    pixels: np.ndarray
    label: Optional[FaultClass] = None

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        dtype = np.uint8 if pixels.dtype == np.uint8 else np.float64
        pixels = _frozen(pixels, dtype=dtype)
        if pixels.ndim != 2 or min(pixels.shape) < 2:
            raise DataError(f"Spectrum image must be a 2-D matrix of at least 2x2, got shape {pixels.shape}")
        if pixels.min() < 0 or pixels.max() > 1:
            raise DataError("Spectrum image pixels must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape

    def matrix(self) -> np.ndarray:
        """Pixels as a float64 matrix."""
        return self.pixels.astype(np.float64)

    @classmethod
    def blank(cls, rows: int = IMAGE_ROWS, cols: int = IMAGE_COLS) -> "SpectrumImage":
        return cls(np.zeros((rows, cols), dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class EigenBasis2D:
    """
    Fitted 2DPCA projection: mean image, all eigenvalues of the scatter matrix
    in descending order and the first d eigenvectors as columns of ``basis``.
    """

    mean_image: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        for name in ("mean_image", "eigenvalues", "basis"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        h, d = self.basis.shape
        if self.mean_image.ndim != 2 or self.mean_image.shape[1] != h:
            raise UserInputValidationError(
                f"Mean image shape {self.mean_image.shape} does not match basis height {h}"
            )
        if self.eigenvalues.shape != (h,):
            raise UserInputValidationError(f"Expected {h} eigenvalues, got {self.eigenvalues.shape}")
        if not 1 <= d < h:
            raise UserInputValidationError(f"Projection dimension d must satisfy 1 <= d < {h}, got {d}")
        if np.any(np.diff(self.eigenvalues) > 0) or self.eigenvalues.min() < -EIGEN_TOLERANCE * max(
            1.0, float(self.eigenvalues[0])
        ):
            raise UserInputValidationError("Eigenvalues must be non-increasing and non-negative")

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def h(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True, eq=False)
class EigenImage:
    """
    Projected feature matrix E = [Y_1 ... Y_d].
    """

    matrix: np.ndarray
    label: Optional[FaultClass] = None

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        if matrix.ndim != 2:
            raise DataError(f"Eigen image must be a matrix, got shape {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def d(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class VectorFeature:
    """
    PCA coordinates of one sample, tagged with the kind of vector they were
    projected from.
    """

    values: np.ndarray
    kind: FeatureKind

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise DataError(f"Vector feature must be 1-D, got shape {values.shape}")
        if self.kind is FeatureKind.EIGEN_IMAGE:
            raise UserInputValidationError("Eigen-image features are matrices, not vectors")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class PcaBasis:
    """
    Flattened-vector PCA basis with contribution-based truncation.
    """

    mean_vector: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    contribution: float

    def __post_init__(self):
        for name in ("mean_vector", "components", "eigenvalues"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        p, k = self.components.shape
        if self.mean_vector.shape != (p,):
            raise UserInputValidationError(f"Mean vector length {self.mean_vector.shape} does not match p={p}")
        if k < 1:
            raise UserInputValidationError("A PCA basis needs at least one component")
        if not 0 < self.contribution <= 1:
            raise UserInputValidationError(f"Contribution must be in (0, 1], got {self.contribution}")

    @property
    def k(self) -> int:
        return self.components.shape[1]

    @property
    def p(self) -> int:
        return self.components.shape[0]
