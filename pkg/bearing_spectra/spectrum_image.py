"""
FFT magnitude spectra and their deterministic rasterization into grayscale
spectrum images.

Images are drawn as white bars from the bottom row up to the auto-scaled
amplitude on a black background. Column ``c`` holds the highest bin mapped to
it; columns no bin maps to take the straight-line height between their
neighbours, so the outline has no gaps.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from bearing_spectra.constants import FFT_POINTS, IMAGE_COLS, IMAGE_ROWS, SPECTRUM_BINS
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.structs import Signal, Spectrum, SpectrumImage

LOGGER = logging.getLogger(__name__)

PGM_MAXVAL = 255


def fft_magnitude(window, sample_rate: float) -> Spectrum:
    """
    |X_k| for k = 0..511 of the unwindowed 1024-point DFT.
    """
    samples = window.samples if isinstance(window, Signal) else np.asarray(window, dtype=np.float64)
    if samples.shape != (FFT_POINTS,):
        raise UserInputValidationError(f"FFT window must hold exactly {FFT_POINTS} samples, got {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise DataError("FFT window contains non-finite samples")
    if not sample_rate > 0:
        raise UserInputValidationError(f"Sample rate must be positive, got {sample_rate}")
    magnitudes = np.abs(np.fft.rfft(samples))[:SPECTRUM_BINS]
    return Spectrum(magnitudes, sample_rate / FFT_POINTS)


def normalized_amplitudes(spectrum: Union[Spectrum, np.ndarray]) -> np.ndarray:
    """Magnitudes divided by their maximum; an all-zero spectrum stays zero."""
    magnitudes = spectrum.magnitudes if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=np.float64)
    peak = magnitudes.max()
    if peak == 0:
        return np.zeros(magnitudes.shape)
    return magnitudes / peak


def column_heights(spectrum: Spectrum, rows: int = IMAGE_ROWS, cols: int = IMAGE_COLS) -> np.ndarray:
    """Bar height per column, in pixels above the bottom row."""
    if rows < 2 or cols < 2:
        raise UserInputValidationError(f"Image must be at least 2x2, got {rows}x{cols}")
    amplitudes = normalized_amplitudes(spectrum)
    if not amplitudes.any():
        LOGGER.warning("Rasterizing an all-zero spectrum as an empty image")
    bin_heights = np.floor(amplitudes * (rows - 1) + 0.5).astype(np.int64)
    bin_columns = (np.arange(SPECTRUM_BINS) * cols) // SPECTRUM_BINS

    heights = np.full(cols, -1, dtype=np.int64)
    np.maximum.at(heights, bin_columns, bin_heights)
    occupied = np.flatnonzero(heights >= 0)
    if occupied.size < cols:
        filled = np.interp(np.arange(cols), occupied, heights[occupied])
        heights = np.floor(filled + 0.5).astype(np.int64)
    return heights


def rasterize_spectrum(spectrum: Spectrum, rows: int = IMAGE_ROWS, cols: int = IMAGE_COLS) -> SpectrumImage:
    """
    Render a spectrum as a rows x cols binary image, auto-scaled to its peak.
    """
    heights = column_heights(spectrum, rows, cols)
    tops = (rows - 1) - heights
    pixels = (np.arange(rows)[:, None] >= tops[None, :]).astype(np.uint8)
    return SpectrumImage(pixels)


def render_window(window: Signal, rows: int = IMAGE_ROWS, cols: int = IMAGE_COLS) -> SpectrumImage:
    """Window -> spectrum -> labeled image."""
    image = rasterize_spectrum(fft_magnitude(window, window.sample_rate), rows, cols)
    return SpectrumImage(image.pixels, window.label)


def write_pgm(image: SpectrumImage, path: Union[str, Path]) -> Path:
    """
    Write a binary (P5) PGM with maxval 255.
    """
    path = Path(path)
    levels = np.floor(image.matrix() * PGM_MAXVAL + 0.5).astype(np.uint8)
    try:
        Image.fromarray(levels).save(path, format="PPM")
    except OSError as error:
        raise DataError(f"Cannot write image {path}: {error}") from error
    return path


def read_pgm(path: Union[str, Path]) -> SpectrumImage:
    """
    Read a PGM back into [0, 1] grayscale.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Image not found: {path}")
    try:
        with Image.open(path) as handle:
            if handle.mode != "L":
                raise DataError(f"{path}: expected an 8-bit grayscale image, got mode {handle.mode}")
            levels = np.asarray(handle, dtype=np.float64)
    except (OSError, SyntaxError) as error:
        raise DataError(f"{path}: cannot decode image: {error}") from error
    return SpectrumImage(levels / PGM_MAXVAL)
