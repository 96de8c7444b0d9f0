"""
Constants for the bearing_spectra package.
"""

import os

from bearing_spectra.enums import FaultType

LOG_LEVEL = os.getenv("BEARING_SPECTRA_LOG_LEVEL", "WARNING")

# rpm per load index (0-3 hp)
LOAD_SPEEDS = {
    0: 1797.0,
    1: 1772.0,
    2: 1750.0,
    3: 1730.0,
}

DEFAULT_SAMPLE_RATE = 12000.0

# characteristic fault frequencies as orders of shaft speed (6205-2RS bearing)
CHARACTERISTIC_ORDERS = {
    FaultType.IF: 5.415,
    FaultType.OF: 3.585,
    FaultType.BF: 2.357,
}

# fundamental train (cage) frequency as an order of shaft speed
CAGE_ORDER = 0.3983

# structural resonance excited by each fault location, Hz
RESONANCES = {
    FaultType.IF: 4500.0,
    FaultType.OF: 3000.0,
    FaultType.BF: 1500.0,
}

FAULT_SIZES = (0.007, 0.014, 0.021, 0.028)
EXPERIMENT_FAULT_SIZES = (0.014, 0.021)

FFT_POINTS = 1024
SPECTRUM_BINS = FFT_POINTS // 2

IMAGE_ROWS = 420
IMAGE_COLS = 560

DEFAULT_D = 10
DEFAULT_CONTRIBUTION = 0.90
DEFAULT_REPETITIONS = 20
DEFAULT_N_VALUES = (1, 3, 5, 10)
CONTRIBUTION_SWEEP = (0.2, 0.4, 0.6, 0.8, 0.9, 1.0)

PROFILES = {
    "desk": 40,
    "full": 400,
}

EIGEN_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-10

MODEL_FORMAT_VERSION = 1
MODEL_MAGIC = "bearing-spectra-model"

IMAGE_MANIFEST_COLUMNS = ["path", "fault_type", "fault_size", "load"]
RAW_MANIFEST_COLUMNS = ["path", "format", "sample_rate", "fault_type", "fault_size", "load"]
REPORT_COLUMNS = ["test_id", "feature_kind", "n", "testing_load", "mean_rate_pct", "stddev_pct", "seconds"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
