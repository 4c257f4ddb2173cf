"""Log-mel filterbank feature extraction and feature-space divergence.

The classifier consumes frames x bands log-power matrices. Divergence
between the features of an original clip and its transcode drives the
codec-subset selection in the augmentation pipeline.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .audio.clip import AudioClip
from .errors import FeatureError


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class FeatureParams:
    sample_rate: int = 44100
    n_fft: int = 2048
    hop: int = 1024
    n_mels: int = 64
    fmin: float = 0.0
    fmax: float = 22050.0
    log_floor: float = 1e-10

    def validate(self):
        if self.n_fft <= 0 or (self.n_fft & (self.n_fft - 1)) != 0:
            raise FeatureError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 0 < self.hop <= self.n_fft:
            raise FeatureError(f"hop must be in (0, n_fft], got {self.hop}")
        if not 0 <= self.fmin < self.fmax <= self.sample_rate / 2:
            raise FeatureError(
                f"need 0 <= fmin < fmax <= Nyquist, got ({self.fmin}, {self.fmax})"
            )
        if self.log_floor <= 0:
            raise FeatureError("log_floor must be positive")
        if self.n_mels < 1:
            raise FeatureError("n_mels must be >= 1")


@dataclass
class LogMel:
    values: np.ndarray  # frames x n_mels, natural log of floored mel power
    params: FeatureParams


def mel_center_frequencies(params: FeatureParams):
    """Band edge/center grid: n_mels+2 points equally spaced on the mel scale."""
    mel_points = np.linspace(hz_to_mel(params.fmin), hz_to_mel(params.fmax), params.n_mels + 2)
    return mel_to_hz(mel_points)


def mel_filterbank(params: FeatureParams) -> np.ndarray:
    """Triangular mel filters as an n_mels x (n_fft/2+1) weight matrix."""
    params.validate()
    n_bins = params.n_fft // 2 + 1
    bin_freqs = np.arange(n_bins) * params.sample_rate / params.n_fft
    edges = mel_center_frequencies(params)

    bank = np.zeros((params.n_mels, n_bins))
    for i in range(params.n_mels):
        lo, center, hi = edges[i], edges[i + 1], edges[i + 2]
        rising = (bin_freqs - lo) / (center - lo)
        falling = (hi - bin_freqs) / (hi - center)
        bank[i] = np.maximum(0.0, np.minimum(rising, falling))
        if bank[i].sum() <= 0:
            raise FeatureError(
                f"mel filter {i} is empty: n_mels={params.n_mels} too large for "
                f"(fmin={params.fmin}, fmax={params.fmax}, n_fft={params.n_fft})"
            )
    return bank


def hann_window(n):
    # periodic Hann, the STFT convention
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def frame_count(n_samples, params: FeatureParams):
    if n_samples < params.n_fft:
        raise FeatureError(f"clip of {n_samples} samples is shorter than one {params.n_fft} frame")
    return 1 + (n_samples - params.n_fft) // params.hop


def log_mel(clip: AudioClip, params: FeatureParams, filterbank=None) -> LogMel:
    """Extract log(max(mel_power, log_floor)) features; Hann window, no padding."""
    params.validate()
    if clip.sample_rate != params.sample_rate:
        raise FeatureError(
            f"clip rate {clip.sample_rate} != feature rate {params.sample_rate}"
        )
    n_frames = frame_count(len(clip.samples), params)
    if filterbank is None:
        filterbank = mel_filterbank(params)

    window = hann_window(params.n_fft)
    starts = np.arange(n_frames) * params.hop
    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, params.n_fft)[starts]
    spectrum = np.fft.rfft(frames * window, axis=1)
    power = spectrum.real**2 + spectrum.imag**2
    mel_power = power @ filterbank.T
    values = np.log(np.maximum(mel_power, params.log_floor))
    return LogMel(values, params)


def feature_divergence(a: LogMel, b: LogMel) -> float:
    """Mean per-frame Euclidean distance between two feature matrices."""
    if a.params != b.params:
        raise FeatureError("feature params differ")
    if a.values.shape != b.values.shape:
        raise FeatureError(f"feature shapes differ: {a.values.shape} vs {b.values.shape}")
    return float(np.mean(np.linalg.norm(a.values - b.values, axis=1)))


class FeatureCache:
    """On-disk feature cache: one f32 matrix + JSON sidecar per (clip, params)."""

    def __init__(self, cache_dir):
        self.cache_dir = cache_dir
        os.makedirs(cache_dir, exist_ok=True)

    @staticmethod
    def params_hash(params: FeatureParams) -> str:
        blob = json.dumps(asdict(params), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:16]

    @staticmethod
    def content_key(clip: AudioClip) -> str:
        h = hashlib.sha1()
        h.update(str(clip.sample_rate).encode())
        h.update(clip.samples.tobytes())
        return h.hexdigest()[:24]

    def _base(self, content_key, params):
        return os.path.join(self.cache_dir, f"{content_key}-{self.params_hash(params)}")

    def get(self, content_key, params: FeatureParams):
        base = self._base(content_key, params)
        if not (os.path.isfile(base + ".f32") and os.path.isfile(base + ".json")):
            return None
        with open(base + ".json", "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        values = np.fromfile(base + ".f32", dtype="<f4").astype(np.float64)
        values = values.reshape(meta["frames"], meta["bands"])
        return LogMel(values, params)

    def put(self, content_key, params: FeatureParams, features: LogMel):
        base = self._base(content_key, params)
        features.values.astype("<f4").tofile(base + ".f32")
        meta = {
            "frames": int(features.values.shape[0]),
            "bands": int(features.values.shape[1]),
            "params": asdict(params),
        }
        with open(base + ".json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True)
