"""
Enums for the bearing_spectra package.
"""

from enum import Enum


class FaultType(Enum):
    """
    Enum for the bearing condition.
    """

    NO = "NO"
    IF = "IF"
    BF = "BF"
    OF = "OF"


class LoadCondition(Enum):
    """
    Enum for the motor load condition. The value is the load index.
    """

    LOAD0 = 0
    LOAD1 = 1
    LOAD2 = 2
    LOAD3 = 3

    @property
    def index(self) -> int:
        return self.value

    @property
    def shaft_speed(self) -> float:
        """Shaft speed in rpm."""
        from bearing_spectra.constants import LOAD_SPEEDS  # pylint: disable=import-outside-toplevel

        return LOAD_SPEEDS[self.value]

    @property
    def horsepower(self) -> int:
        return self.value

    @property
    def shaft_frequency(self) -> float:
        """Shaft rotations per second."""
        return self.shaft_speed / 60.0

    def __str__(self):
        return f"Load{self.value}"


class FeatureKind(Enum):
    """
    Enum for the feature a model is trained on.
    """

    EIGEN_IMAGE = "2dpca"
    PCA_VECTOR = "pca"
    FFT_AMPLITUDE = "fft"


class RawFormat(Enum):
    """
    Enum for the raw recording file formats.
    """

    FLOAT32_LE = "float32-le"
    FLOAT64_LE = "float64-le"
    CSV = "csv"


class ReportFormat(Enum):
    """
    Enum for the report output format.
    """

    CSV = "csv"
    TEXT = "text"


class DataSource(Enum):
    """
    Enum for where experiment signals come from.
    """

    SYNTHETIC = "synthetic"
    INGESTED = "ingested"
