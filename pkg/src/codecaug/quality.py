"""Objective quality proxy (NMR -> ODG) and least-squares analysis.

The proxy reuses the transform codec's masking model: noise band
energies of (test - reference) are compared against the masking
threshold computed from the reference, averaged in dB, then mapped
through a fixed sigmoid onto the [-4, 0] objective-difference-grade
scale. Masking is computed on the reference only, so argument roles are
not interchangeable.
"""

from dataclasses import dataclass

import numpy as np

from .audio.clip import AudioClip
from .codecs import psycho
from .codecs.ptc import mdct_analyze
from .errors import QualityError

NMR_WINDOW = 1024
NMR_FLOOR_DB = -60.0

# sigmoid calibration, frozen: identical clips land at 0 (clamped) and
# additive noise at 0 dB relative lands below -3.5
ODG_SLOPE = 0.35
ODG_MIDPOINT_DB = -2.0
ODG_CLAMP = -0.05


@dataclass(frozen=True)
class QualityScore:
    odg: float
    nmr_db: float


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float


def _check_pair(reference: AudioClip, test: AudioClip):
    if reference.sample_rate != test.sample_rate:
        raise QualityError(
            f"sample rates differ: {reference.sample_rate} vs {test.sample_rate}")
    if reference.samples.size != test.samples.size:
        raise QualityError(
            f"lengths differ: {reference.samples.size} vs {test.samples.size}")
    if np.max(np.abs(reference.samples)) == 0.0:
        raise QualityError("reference is silent; masking threshold undefined")


def nmr(reference: AudioClip, test: AudioClip) -> float:
    """Mean noise-to-mask ratio in dB, clamped at -60 per band/frame."""
    _check_pair(reference, test)
    n_bins = NMR_WINDOW // 2
    ref_spec = mdct_analyze(reference.samples, n_bins)
    test_spec = mdct_analyze(test.samples, n_bins)
    layout = psycho.band_layout(n_bins, reference.sample_rate)
    ref_energy = psycho.band_energies(ref_spec ** 2, layout)
    noise_energy = psycho.band_energies((test_spec - ref_spec) ** 2, layout)
    thresholds = psycho.masking_thresholds(ref_energy, layout)
    ratio = np.maximum(noise_energy / thresholds, 10.0 ** (NMR_FLOOR_DB / 10.0))
    return float(np.mean(10.0 * np.log10(ratio)))


def odg_proxy(reference: AudioClip, test: AudioClip) -> QualityScore:
    """PEAQ-style objective difference grade in [-4, 0]."""
    nmr_db = nmr(reference, test)
    raw = -4.0 / (1.0 + np.exp(-ODG_SLOPE * (nmr_db - ODG_MIDPOINT_DB)))
    odg = 0.0 if raw >= ODG_CLAMP else float(raw)
    return QualityScore(odg=odg, nmr_db=nmr_db)


def linear_fit(x, y) -> RegressionFit:
    """Ordinary least squares y = slope*x + intercept with R^2."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise QualityError("x and y must be equal-length vectors")
    if xs.size < 2:
        raise QualityError(f"need at least 2 points, got {xs.size}")
    x_var = np.sum((xs - xs.mean()) ** 2)
    y_var = np.sum((ys - ys.mean()) ** 2)
    if x_var == 0.0:
        raise QualityError("zero variance in x; fit undefined")
    if y_var == 0.0:
        raise QualityError("zero variance in y; R^2 undefined")
    slope = float(np.sum((xs - xs.mean()) * (ys - ys.mean())) / x_var)
    intercept = float(ys.mean() - slope * xs.mean())
    residual = ys - (slope * xs + intercept)
    r_squared = 1.0 - float(np.sum(residual ** 2)) / float(y_var)
    return RegressionFit(slope=slope, intercept=intercept,
                         r_squared=float(np.clip(r_squared, 0.0, 1.0)))


def write_scatter_csv(path, entries):
    """Rows of (codec_spec, mean_odg, accuracy) behind the quality-vs-
    accuracy scatter analysis."""
    lines = ["codec_spec,mean_odg,accuracy"]
    for spec_text, mean_odg, accuracy in entries:
        lines.append(f"{spec_text},{mean_odg:.6f},{accuracy:.6f}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
