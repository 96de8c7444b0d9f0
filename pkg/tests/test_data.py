"""
Default test data for the tests.

"""

from bearing_spectra.enums import FaultType, LoadCondition
from bearing_spectra.experiment import ExperimentConfig
from bearing_spectra.structs import FaultClass

TEST_SEED = 7
TEST_SAMPLE_RATE = 12000.0
TEST_FAULT_SIZE = 0.014

NO_CLASS = FaultClass(FaultType.NO)
IF_CLASS = FaultClass(FaultType.IF, TEST_FAULT_SIZE)
BF_CLASS = FaultClass(FaultType.BF, TEST_FAULT_SIZE)
OF_CLASS = FaultClass(FaultType.OF, TEST_FAULT_SIZE)

# small images keep the harness tests fast
SMALL_ROWS = 42
SMALL_COLS = 56

CSV_RECORDING = "1.0\n-2.5\n0.0"
CSV_SAMPLES = [1.0, -2.5, 0.0]

SCATTER_IMAGES = [
    [[1.0, 0.0], [0.0, 0.0]],
    [[0.0, 0.0], [0.0, 0.0]],
]
SCATTER_EXPECTED = [[0.25, 0.0], [0.0, 0.0]]

COLUMN_SUM_FIRST = [[1.0, 0.0], [0.0, 0.0]]
COLUMN_SUM_SECOND = [[0.0, 0.0], [0.0, 2.0]]

CONFIG_TEXT = """
# desk-scale run
profile = desk
seed = 11
repetitions = 3
feature_kind = pca
contribution = 0.8
training_load = 1
testing_loads = 0, 1
classes = IF, NO
record_timing = false
noise_std = 0.1
order_of = 3.6
resonance_bf = 1800.0
shaft_harmonics = 1.0, 0.25
tests = 1, 5
n_values = 1, 3
feature_kinds = 2dpca, fft
"""


def small_config(**changes) -> ExperimentConfig:
    """
    A fast synthetic test: 4 images per class and load rendered at 42x56.
    """
    values = {
        "seed": TEST_SEED,
        "images_per_class": 4,
        "n_per_class": 2,
        "repetitions": 3,
        "image_rows": SMALL_ROWS,
        "image_cols": SMALL_COLS,
        "d": 3,
        "training_load": LoadCondition.LOAD0,
        "testing_loads": (LoadCondition.LOAD0, LoadCondition.LOAD2),
        "record_timing": False,
    }
    values.update(changes)
    return ExperimentConfig(**values)
