"""
Experiment harness: corpus construction, randomized train/test repetitions,
the packaged test grid and parameter sweeps.

Repetition ``r`` draws its training set from ``seed + r`` only, so every
feature kind sees the same splits and any repetition can be rerun alone.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from bearing_spectra.classifier import classify, extract_features, train_model
from bearing_spectra.constants import (
    CONTRIBUTION_SWEEP,
    DEFAULT_CONTRIBUTION,
    DEFAULT_D,
    DEFAULT_N_VALUES,
    DEFAULT_REPETITIONS,
    EXPERIMENT_FAULT_SIZES,
    FFT_POINTS,
    IMAGE_COLS,
    IMAGE_ROWS,
    PROFILES,
    RAW_MANIFEST_COLUMNS,
)
from bearing_spectra.enums import DataSource, FaultType, FeatureKind, LoadCondition, RawFormat
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.model_io import manifest_label, manifest_load, read_manifest
from bearing_spectra.report import Report, ReportEntry
from bearing_spectra.spectrum_image import fft_magnitude, rasterize_spectrum
from bearing_spectra.structs import FaultClass, Signal, SynthParams
from bearing_spectra.utils import array_digest, derive_seed, get_table
from bearing_spectra.vibration import ingest_raw, segment, synth_bearing_signal

LOGGER = logging.getLogger(__name__)

ALL_LOADS = tuple(LoadCondition)
FAULT_TYPES = (FaultType.IF, FaultType.BF, FaultType.OF, FaultType.NO)
SWEEPABLE = ("d", "contribution", "n_per_class")
DEFAULT_SWEEPS = {"contribution": CONTRIBUTION_SWEEP}

CorpusKey = Tuple[FaultType, LoadCondition]


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One test of the protocol: a training load, its testing loads and the
    feature kind and sizes used.
    """

    source: DataSource = DataSource.SYNTHETIC
    manifest: Optional[str] = None
    synth: SynthParams = field(default_factory=SynthParams)
    seed: int = 0
    test_id: int = 1
    fault_size: float = 0.014
    training_load: LoadCondition = LoadCondition.LOAD0
    testing_loads: Tuple[LoadCondition, ...] = ALL_LOADS
    classes: Tuple[FaultType, ...] = FAULT_TYPES
    n_per_class: int = 5
    repetitions: int = DEFAULT_REPETITIONS
    feature_kind: FeatureKind = FeatureKind.EIGEN_IMAGE
    d: int = DEFAULT_D
    contribution: float = DEFAULT_CONTRIBUTION
    images_per_class: int = PROFILES["desk"]
    image_rows: int = IMAGE_ROWS
    image_cols: int = IMAGE_COLS
    workers: int = 1
    record_timing: bool = True

    def __post_init__(self):
        if self.source is DataSource.INGESTED and not self.manifest:
            raise UserInputValidationError("An ingested data source needs a manifest path")
        if not any(math.isclose(self.fault_size, size) for size in EXPERIMENT_FAULT_SIZES):
            raise UserInputValidationError(f"Fault size must be one of {EXPERIMENT_FAULT_SIZES}, got {self.fault_size}")
        if self.images_per_class < 1:
            raise UserInputValidationError(f"Images per class must be positive, got {self.images_per_class}")
        if not 1 <= self.n_per_class <= self.images_per_class:
            raise UserInputValidationError(
                f"n_per_class must be in [1, {self.images_per_class}], got {self.n_per_class}"
            )
        if self.repetitions < 1:
            raise UserInputValidationError(f"Repetitions must be at least 1, got {self.repetitions}")
        if self.workers < 1:
            raise UserInputValidationError(f"Workers must be at least 1, got {self.workers}")
        if not self.classes or len(set(self.classes)) != len(self.classes):
            raise UserInputValidationError(f"Classes must be distinct and non-empty, got {self.classes}")
        if not self.testing_loads:
            raise UserInputValidationError("At least one testing load is required")
        if self.image_rows < 2 or self.image_cols < 2:
            raise UserInputValidationError(f"Image must be at least 2x2, got {self.image_rows}x{self.image_cols}")

    def fault_class(self, fault_type: FaultType) -> FaultClass:
        return FaultClass(fault_type, None if fault_type is FaultType.NO else self.fault_size)

    @property
    def loads(self) -> Tuple[LoadCondition, ...]:
        """Training and testing loads, in index order."""
        return tuple(sorted({self.training_load, *self.testing_loads}, key=lambda load: load.index))


@dataclass(frozen=True)
class SuiteConfig:
    """
    The grid of tests x feature kinds x training sizes run on one base config.
    """

    base: ExperimentConfig = field(default_factory=ExperimentConfig)
    tests: Tuple[int, ...] = tuple(range(1, 9))
    n_values: Tuple[int, ...] = DEFAULT_N_VALUES
    feature_kinds: Tuple[FeatureKind, ...] = (FeatureKind.EIGEN_IMAGE,)


@dataclass(frozen=True, eq=False)
class Corpus:
    """
    Rendered images (uint8 0/1 stacks) and their magnitude spectra per
    (fault type, load).
    """

    images: Dict[CorpusKey, np.ndarray]
    spectra: Dict[CorpusKey, np.ndarray]
    labels: Dict[FaultType, FaultClass]

    def __len__(self):
        return sum(stack.shape[0] for stack in self.images.values())

    def count(self, fault_type: FaultType, load: LoadCondition) -> int:
        key = (fault_type, load)
        if key not in self.images:
            raise DataError(f"Corpus holds no {fault_type.value} images for {load}")
        return self.images[key].shape[0]

    def digest(self) -> str:
        """Hash of every image, in key order."""
        keys = sorted(self.images, key=lambda key: (key[0].value, key[1].index))
        return array_digest(np.concatenate([self.images[key].reshape(-1) for key in keys]))


def render_windows(windows: Sequence[Signal], rows: int, cols: int) -> Tuple[np.ndarray, np.ndarray]:
    """Spectrum image and magnitude spectrum of every window."""
    images = np.empty((len(windows), rows, cols), dtype=np.uint8)
    spectra = np.empty((len(windows), FFT_POINTS // 2))
    for index, window in enumerate(windows):
        spectrum = fft_magnitude(window, window.sample_rate)
        spectra[index] = spectrum.magnitudes
        images[index] = rasterize_spectrum(spectrum, rows, cols).pixels
    return images, spectra


def synthetic_recording(config: ExperimentConfig, fault_type: FaultType, load: LoadCondition) -> Signal:
    """
    The synthetic recording of one class and load, long enough for
    ``images_per_class`` disjoint windows.
    """
    params = config.synth
    # normal recordings do not depend on the fault size under study
    size_key = 0 if fault_type is FaultType.NO else int(round(config.fault_size * 1000))
    seed = derive_seed(config.seed, size_key, FAULT_TYPES.index(fault_type), load.index)
    duration = config.images_per_class * FFT_POINTS / params.sample_rate
    return synth_bearing_signal(params, config.fault_class(fault_type), load, duration, seed)


def _synthetic_windows(config: ExperimentConfig, fault_type: FaultType, load: LoadCondition) -> List[Signal]:
    signal = synthetic_recording(config, fault_type, load)
    return segment(signal, FFT_POINTS, FFT_POINTS)[: config.images_per_class]


def _ingested_windows(config: ExperimentConfig, fault_type: FaultType, load: LoadCondition, frame) -> List[Signal]:
    label = config.fault_class(fault_type)
    windows: List[Signal] = []
    for _, row in frame.iterrows():
        if manifest_label(row) != label or manifest_load(row) is not load:
            continue
        signal = ingest_raw(row["path"], RawFormat(str(row["format"])), float(row["sample_rate"]), label, load)
        if len(signal) >= FFT_POINTS:
            windows.extend(segment(signal, FFT_POINTS, FFT_POINTS))
        if len(windows) >= config.images_per_class:
            break
    if len(windows) < config.images_per_class:
        raise DataError(
            f"Recordings of {label} at {load} give {len(windows)} windows of {FFT_POINTS} samples, "
            f"{config.images_per_class} are needed (short by {config.images_per_class - len(windows)})"
        )
    return windows[: config.images_per_class]


def build_corpus(config: ExperimentConfig, loads: Optional[Sequence[LoadCondition]] = None) -> Corpus:
    """
    Render ``images_per_class`` spectrum images for every class and load.
    """
    loads = tuple(loads) if loads is not None else ALL_LOADS
    frame = read_manifest(config.manifest, RAW_MANIFEST_COLUMNS) if config.source is DataSource.INGESTED else None
    images, spectra = {}, {}
    for fault_type in config.classes:
        for load in loads:
            if frame is None:
                windows = _synthetic_windows(config, fault_type, load)
            else:
                windows = _ingested_windows(config, fault_type, load, frame)
            images[(fault_type, load)], spectra[(fault_type, load)] = render_windows(
                windows, config.image_rows, config.image_cols
            )
    corpus = Corpus(images, spectra, {fault_type: config.fault_class(fault_type) for fault_type in config.classes})
    LOGGER.info(
        "Built %s corpus of %d images (%d per class and load, fault size %.3f)",
        config.source.value,
        len(corpus),
        config.images_per_class,
        config.fault_size,
    )
    return corpus


@dataclass
class _RepetitionResult:
    rates: Dict[LoadCondition, float]
    confusion: Dict[LoadCondition, np.ndarray]
    seconds: Dict[LoadCondition, float]


def _training_split(config: ExperimentConfig, corpus: Corpus, repetition: int):
    rng = np.random.default_rng(config.seed + repetition)
    images, spectra, labels = [], [], []
    for fault_type in config.classes:
        key = (fault_type, config.training_load)
        available = corpus.count(*key)
        if config.n_per_class > available:
            raise UserInputValidationError(
                f"n_per_class={config.n_per_class} exceeds the {available} {fault_type.value} images at "
                f"{config.training_load}"
            )
        picks = rng.choice(available, size=config.n_per_class, replace=False)
        images.append(corpus.images[key][picks])
        spectra.append(corpus.spectra[key][picks])
        labels.extend([corpus.labels[fault_type]] * config.n_per_class)
    return np.concatenate(images), np.concatenate(spectra), labels


def run_repetition(config: ExperimentConfig, corpus: Corpus, repetition: int) -> _RepetitionResult:
    """
    Fit on one random training split and classify every image of every
    testing load.
    """
    train_images, train_spectra, labels = _training_split(config, corpus, repetition)
    kind = config.feature_kind
    started = time.perf_counter()
    model = train_model(
        kind,
        labels,
        images=train_images,
        spectra=train_spectra,
        d=config.d,
        contribution=config.contribution,
    )
    fit_share = (time.perf_counter() - started) / len(config.testing_loads)

    result = _RepetitionResult({}, {}, {})
    positions = {fault_type: index for index, fault_type in enumerate(config.classes)}
    for load in config.testing_loads:
        started = time.perf_counter()
        confusion = np.zeros((len(config.classes), len(config.classes)), dtype=np.int64)
        for fault_type in config.classes:
            key = (fault_type, load)
            for image, spectrum in zip(corpus.images[key], corpus.spectra[key]):
                feature = extract_features(kind, model.basis, image=image, spectrum=spectrum)
                predicted = classify(feature, model).label.fault_type
                confusion[positions[fault_type], positions[predicted]] += 1
        result.seconds[load] = fit_share + time.perf_counter() - started
        result.confusion[load] = confusion
        result.rates[load] = 100.0 * np.trace(confusion) / confusion.sum()
    LOGGER.debug(
        "Test %d %s n=%d repetition %d: %s",
        config.test_id,
        kind.value,
        config.n_per_class,
        repetition,
        {str(load): round(rate, 2) for load, rate in result.rates.items()},
    )
    return result


def run_test(config: ExperimentConfig, corpus: Optional[Corpus] = None) -> Report:
    """
    All repetitions of one test; one report entry per testing load.
    """
    if corpus is None:
        corpus = build_corpus(config, config.loads)
    if config.n_per_class > min(corpus.count(fault_type, config.training_load) for fault_type in config.classes):
        raise UserInputValidationError(f"n_per_class={config.n_per_class} exceeds the training corpus")
    for load in config.testing_loads:
        for fault_type in config.classes:
            if corpus.count(fault_type, load) == 0:
                raise DataError(f"Corpus holds no {fault_type.value} test images for {load}")

    repetitions = range(config.repetitions)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda r: run_repetition(config, corpus, r), repetitions))
    else:
        results = [run_repetition(config, corpus, r) for r in repetitions]

    report = Report()
    for load in config.testing_loads:
        confusion = sum(result.confusion[load] for result in results)
        rates = tuple(result.rates[load] for result in results)
        report.add(
            ReportEntry(
                test_id=config.test_id,
                feature_kind=config.feature_kind,
                n=config.n_per_class,
                testing_load=load,
                mean_rate_pct=100.0 * np.trace(confusion) / confusion.sum(),
                stddev_pct=float(np.std(rates)),
                seconds=sum(result.seconds[load] for result in results) if config.record_timing else None,
                training_load=config.training_load,
                fault_size=config.fault_size,
                rates=rates,
                confusion=confusion,
                classes=config.classes,
            )
        )
    LOGGER.info(
        "Test %d (%s, n=%d, train %s): %s",
        config.test_id,
        config.feature_kind.value,
        config.n_per_class,
        config.training_load,
        ", ".join(f"{entry.testing_load}={entry.mean_rate_pct:.2f}%" for entry in report.entries),
    )
    return report


def expand_suite(suite: SuiteConfig) -> List[ExperimentConfig]:
    """
    Expand the suite into one config per (feature kind, test, n), following
    the packaged test grid.
    """
    table = {row["test_id"]: row for row in get_table("test_grid")}
    configs = []
    for kind in suite.feature_kinds:
        for test_id in suite.tests:
            if test_id not in table:
                raise UserInputValidationError(f"Unknown test id {test_id}; known tests are {sorted(table)}")
            row = table[test_id]
            for n in suite.n_values:
                configs.append(
                    replace(
                        suite.base,
                        test_id=test_id,
                        training_load=LoadCondition(row["training_load"]),
                        testing_loads=tuple(LoadCondition(index) for index in row["testing_loads"]),
                        classes=tuple(FaultType(name) for name in row["classes"]),
                        fault_size=row["fault_size"],
                        feature_kind=kind,
                        n_per_class=n,
                    )
                )
    return configs


def run_suite(suite: SuiteConfig) -> Report:
    """
    Run every configured test, sharing one corpus per fault size.
    """
    report = Report()
    corpora: Dict[float, Corpus] = {}
    for config in expand_suite(suite):
        if config.fault_size not in corpora:
            corpora[config.fault_size] = build_corpus(config, ALL_LOADS)
        report.extend(run_test(config, corpora[config.fault_size]))
    LOGGER.info("Suite finished with %d report entries", len(report))
    return report


def sweep(
    config: ExperimentConfig,
    parameter: str,
    values: Optional[Sequence[float]] = None,
    corpus: Optional[Corpus] = None,
) -> Report:
    """
    Rerun one test for each value of ``d``, ``contribution`` or
    ``n_per_class``; entries carry the swept value. Contribution sweeps
    default to 20, 40, 60, 80, 90 and 100%.
    """
    if parameter not in SWEEPABLE:
        raise UserInputValidationError(f"Cannot sweep {parameter!r}; choose one of {SWEEPABLE}")
    if values is None:
        if parameter not in DEFAULT_SWEEPS:
            raise UserInputValidationError(f"Sweeping {parameter} needs explicit values")
        values = DEFAULT_SWEEPS[parameter]
    if len(values) == 0:
        raise UserInputValidationError("A sweep needs at least one value")
    if corpus is None:
        corpus = build_corpus(config, config.loads)
    cast = float if parameter == "contribution" else int
    report = Report()
    for value in values:
        swept = run_test(replace(config, **{parameter: cast(value)}), corpus)
        for entry in swept.entries:
            report.add(replace(entry, sweep_parameter=parameter, sweep_value=float(value)))
    return report

