"""Simplified psychoacoustic model on MDCT power spectra.

Nonuniform band layout approximating a Bark scale (6*asinh(f/600)),
directional two-pass spreading, and a masking threshold of
max(spread energy - 13 dB, absolute hearing threshold). Shared by the
transform codec's quantizer and the NMR quality metric.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import QualityError

N_BANDS = 32
MASK_OFFSET_DB = 13.0
SPREAD_UP_DB = 10.0    # decay per band toward higher frequencies
SPREAD_DOWN_DB = 22.0  # decay per band toward lower frequencies

# dB of the peak-bin MDCT power of a full-scale sine (window 1024);
# anchors the 96 dB SPL reference of the absolute-threshold curve.
FULLSCALE_SINE_DB = 47.37


def bark(freq_hz):
    return 6.0 * np.arcsinh(np.asarray(freq_hz, dtype=np.float64) / 600.0)


@dataclass(frozen=True)
class BandLayout:
    sample_rate: int
    n_bins: int
    edges: np.ndarray  # (n_bands + 1,) bin indices, edges[0] = 0

    @property
    def n_bands(self) -> int:
        return self.edges.size - 1

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.edges)

    def center_frequencies(self) -> np.ndarray:
        nyquist = self.sample_rate / 2.0
        centers = (self.edges[:-1] + self.edges[1:]) / 2.0
        return centers * nyquist / self.n_bins

    def bin_frequencies(self) -> np.ndarray:
        nyquist = self.sample_rate / 2.0
        return (np.arange(self.n_bins) + 0.5) * nyquist / self.n_bins


def band_layout(n_bins: int, sample_rate: int, n_bands: int = N_BANDS) -> BandLayout:
    """Bark-ish partition of n_bins uniform bins into n_bands groups."""
    if n_bands > n_bins:
        raise QualityError(f"cannot split {n_bins} bins into {n_bands} bands")
    nyquist = sample_rate / 2.0
    bark_edges = np.linspace(0.0, bark(nyquist), n_bands + 1)
    freq_edges = 600.0 * np.sinh(bark_edges / 6.0)
    edges = np.floor(freq_edges / nyquist * n_bins).astype(np.int64)
    edges[0] = 0
    edges[-1] = n_bins
    # at least one bin per band
    for b in range(1, n_bands + 1):
        if edges[b] <= edges[b - 1]:
            edges[b] = edges[b - 1] + 1
    for b in range(n_bands, 0, -1):
        if edges[b] > n_bins - (n_bands - b):
            edges[b] = n_bins - (n_bands - b)
    if edges[-1] != n_bins or np.any(np.diff(edges) < 1):
        raise QualityError("degenerate band layout")
    return BandLayout(sample_rate=sample_rate, n_bins=n_bins, edges=edges)


def band_energies(power: np.ndarray, layout: BandLayout) -> np.ndarray:
    """Sum bin powers per band; power is (..., n_bins)."""
    if power.shape[-1] != layout.n_bins:
        raise QualityError(
            f"expected {layout.n_bins} bins, got {power.shape[-1]}")
    return np.add.reduceat(power, layout.edges[:-1], axis=-1)


def spread_energies(energies: np.ndarray) -> np.ndarray:
    """Two-pass directional spreading across bands (last axis)."""
    up = 10.0 ** (-SPREAD_UP_DB / 10.0)
    down = 10.0 ** (-SPREAD_DOWN_DB / 10.0)
    spread = np.array(energies, dtype=np.float64, copy=True)
    n = spread.shape[-1]
    for b in range(1, n):
        spread[..., b] = np.maximum(spread[..., b], spread[..., b - 1] * up)
    for b in range(n - 2, -1, -1):
        spread[..., b] = np.maximum(spread[..., b], spread[..., b + 1] * down)
    return spread


def _terhardt_db(freq_hz):
    khz = np.maximum(np.asarray(freq_hz, dtype=np.float64) / 1000.0, 1e-3)
    curve = (3.64 * khz ** -0.8
             - 6.5 * np.exp(-0.6 * (khz - 3.3) ** 2)
             + 1e-3 * khz ** 4)
    return np.clip(curve, -10.0, 70.0)


def absolute_threshold(layout: BandLayout) -> np.ndarray:
    """Band-integrated hearing threshold in MDCT power units."""
    freqs = layout.bin_frequencies()
    per_bin = 10.0 ** ((_terhardt_db(freqs) - 96.0 + FULLSCALE_SINE_DB) / 10.0)
    return np.add.reduceat(per_bin, layout.edges[:-1])


def masking_thresholds(energies: np.ndarray, layout: BandLayout) -> np.ndarray:
    """Per-band masking threshold for band energies of shape (..., n_bands)."""
    if energies.shape[-1] != layout.n_bands:
        raise QualityError(
            f"expected {layout.n_bands} bands, got {energies.shape[-1]}")
    masked = spread_energies(energies) * 10.0 ** (-MASK_OFFSET_DB / 10.0)
    return np.maximum(masked, absolute_threshold(layout))
