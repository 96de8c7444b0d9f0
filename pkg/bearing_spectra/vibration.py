"""
Labeled vibration windows: synthetic bearing signals, raw recording ingestion
and fixed-length segmentation.
"""

import logging
import math
import re
from pathlib import Path
from typing import List, Union

import numpy as np

from bearing_spectra.constants import CAGE_ORDER, FFT_POINTS
from bearing_spectra.enums import FaultType, LoadCondition, RawFormat
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.structs import FaultClass, Signal, SynthParams
from bearing_spectra.utils import DEFAULT_ENCODING

LOGGER = logging.getLogger(__name__)

# an impulse response is cut after this many time constants
DECAY_SPAN = 12.0

# load zone modulation: inner-race defects pass it once per shaft turn, balls once per cage turn
MODULATION_ORDERS = {
    FaultType.IF: 1.0,
    FaultType.BF: CAGE_ORDER,
}

# one decimal value per line, "." separator, ASCII digits only
CSV_NUMBER = re.compile(r"[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")

BINARY_DTYPES = {
    RawFormat.FLOAT32_LE: np.dtype("<f4"),
    RawFormat.FLOAT64_LE: np.dtype("<f8"),
}


def segment(signal: Signal, window_len: int = FFT_POINTS, hop: int = FFT_POINTS) -> List[Signal]:
    """
    Cut a signal into windows of ``window_len`` samples every ``hop`` samples.
    The trailing remainder shorter than a window is dropped.
    """
    if window_len < 1 or hop < 1:
        raise UserInputValidationError(f"Window length and hop must be positive, got {window_len} and {hop}")
    if len(signal) < window_len:
        raise DataError(f"Signal of {len(signal)} samples is shorter than the {window_len}-sample window")
    views = np.lib.stride_tricks.sliding_window_view(signal.samples, window_len)[::hop]
    return [Signal(view, signal.sample_rate, signal.label, signal.load) for view in views]


def _impulse_train(
    params: SynthParams, fault_type: FaultType, load: LoadCondition, n: int, rng: np.random.Generator
) -> np.ndarray:
    fs = params.sample_rate
    rate = params.orders[fault_type] * load.shaft_frequency
    out = np.zeros(n)
    if rate <= 0:
        return out
    period = 1.0 / rate
    duration = n / fs
    start = rng.uniform(0.0, period)
    count = int(math.floor((duration - start) * rate)) + 1
    onsets = start + np.arange(count) * period + rng.normal(0.0, 1.0, count) * params.jitter * period
    amplitudes = np.full(count, params.impulse_amplitude)
    modulation = MODULATION_ORDERS.get(fault_type)
    if modulation is not None:
        amplitudes *= 1.0 + params.modulation_depth * np.cos(2 * np.pi * modulation * load.shaft_frequency * onsets)
    resonance = params.resonances[fault_type]
    tail = int(math.ceil(DECAY_SPAN / params.decay * fs)) if params.decay > 0 else n
    for onset, amplitude in zip(onsets, amplitudes):
        first = max(0, int(math.ceil(onset * fs)))
        last = min(n, first + tail)
        if first >= last:
            continue
        tau = np.arange(first, last) / fs - onset
        out[first:last] += amplitude * np.exp(-params.decay * tau) * np.sin(2 * np.pi * resonance * tau)
    return out


def synth_bearing_signal(
    params: SynthParams, fault_class: FaultClass, load: LoadCondition, duration: float, seed: int
) -> Signal:
    """
    Simulate an accelerometer record.

    Normal bearings produce shaft harmonics only. Faulty bearings produce a
    train of decaying bursts at the characteristic frequency of the fault,
    ringing at the resonance of the fault location, with per-impulse timing
    jitter. Inner-race bursts are amplitude-modulated at shaft rate and ball
    bursts at cage rate. White noise is added to both.
    """
    if not duration > 0:
        raise UserInputValidationError(f"Duration must be positive, got {duration}")
    n = int(round(duration * params.sample_rate))
    if n < FFT_POINTS:
        raise UserInputValidationError(
            f"Duration {duration}s at {params.sample_rate} Hz gives {n} samples, fewer than {FFT_POINTS}"
        )
    rng = np.random.default_rng(seed)
    t = np.arange(n) / params.sample_rate
    if fault_class.fault_type is FaultType.NO:
        shaft = load.shaft_frequency
        phases = rng.uniform(0.0, 2 * np.pi, len(params.shaft_harmonics))
        samples = np.zeros(n)
        for order, (amplitude, phase) in enumerate(zip(params.shaft_harmonics, phases), start=1):
            samples += amplitude * np.sin(2 * np.pi * order * shaft * t + phase)
    else:
        samples = _impulse_train(params, fault_class.fault_type, load, n, rng)
    if params.noise_std > 0:
        samples = samples + rng.normal(0.0, params.noise_std, n)
    LOGGER.debug("Synthesized %s at %s: %d samples (seed %d)", fault_class, load, n, seed)
    return Signal(samples, params.sample_rate, fault_class, load)


def _decode_binary(path: Path, data: bytes, fmt: RawFormat) -> np.ndarray:
    dtype = BINARY_DTYPES[fmt]
    if len(data) % dtype.itemsize:
        offset = len(data) - len(data) % dtype.itemsize
        raise DataError(f"{path}: {len(data) % dtype.itemsize} trailing bytes at byte offset {offset}")
    values = np.frombuffer(data, dtype=dtype).astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise DataError(f"{path}: non-finite value at byte offset {int(bad[0]) * dtype.itemsize}")
    return values


def _decode_csv(path: Path, data: bytes) -> np.ndarray:
    try:
        text = data.decode(DEFAULT_ENCODING)
    except UnicodeDecodeError as error:
        raise DataError(f"{path}: not valid text at byte offset {error.start}") from error
    lines = [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]
    while lines and not lines[-1].strip(" \t"):
        lines.pop()
    values = np.empty(len(lines))
    for number, line in enumerate(lines, start=1):
        token = line.strip(" \t")
        if not CSV_NUMBER.fullmatch(token):
            raise DataError(f"{path}: line {number} is not a number: {line!r}")
        value = float(token)
        if not math.isfinite(value):
            raise DataError(f"{path}: line {number} holds a non-finite value: {line!r}")
        values[number - 1] = value
    return values


def ingest_raw(
    path: Union[str, Path],
    fmt: RawFormat,
    sample_rate: float,
    label: FaultClass,
    load: LoadCondition,
) -> Signal:
    """
    Read a raw recording: little-endian float32/float64 or one-column CSV.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Raw recording not found: {path}")
    data = path.read_bytes()
    if not data:
        raise DataError(f"{path}: empty file")
    values = _decode_csv(path, data) if fmt is RawFormat.CSV else _decode_binary(path, data, fmt)
    if values.size == 0:
        raise DataError(f"{path}: no samples")
    LOGGER.info("Ingested %d samples of %s at %s from %s", values.size, label, load, path)
    return Signal(values, sample_rate, label, load)


def write_raw(signal: Signal, path: Union[str, Path], fmt: RawFormat) -> Path:
    """
    Write a signal in one of the raw formats. CSV uses repr floats so the
    values read back unchanged.
    """
    path = Path(path)
    if fmt is RawFormat.CSV:
        path.write_text("".join(f"{value!r}\n" for value in signal.samples.tolist()), encoding=DEFAULT_ENCODING)
    else:
        path.write_bytes(signal.samples.astype(BINARY_DTYPES[fmt]).tobytes())
    return path
