"""Feature extraction tests.

log_mel is verified against an oracle that computes the DFT by direct
complex-exponential summation and applies the triangle weights in an
explicit per-filter loop, sharing no code with the fast path.
"""

import math

import numpy as np
import pytest

from codecaug.audio.clip import AudioClip
from codecaug.codecs import parse_codec_spec, transcode
from codecaug.errors import FeatureError
from codecaug.features import (
    FeatureCache,
    FeatureParams,
    LogMel,
    feature_divergence,
    frame_count,
    hann_window,
    hz_to_mel,
    log_mel,
    mel_center_frequencies,
    mel_filterbank,
    mel_to_hz,
)
from helpers import noise_clip


def oracle_log_mel(samples, params):
    """Brute-force DFT + explicit triangle summation, no FFT, no matmul."""
    n_fft, hop = params.n_fft, params.hop
    n_bins = n_fft // 2 + 1
    window = [0.5 - 0.5 * math.cos(2.0 * math.pi * i / n_fft) for i in range(n_fft)]

    edges = mel_center_frequencies(params)
    bin_freq = [b * params.sample_rate / n_fft for b in range(n_bins)]

    n_frames = 1 + (len(samples) - n_fft) // hop
    out = np.zeros((n_frames, params.n_mels))
    for f in range(n_frames):
        frame = [samples[f * hop + i] * window[i] for i in range(n_fft)]
        power = []
        for k in range(n_bins):
            re = im = 0.0
            for n, x in enumerate(frame):
                ang = -2.0 * math.pi * k * n / n_fft
                re += x * math.cos(ang)
                im += x * math.sin(ang)
            power.append(re * re + im * im)
        for m in range(params.n_mels):
            lo, center, hi = edges[m], edges[m + 1], edges[m + 2]
            acc = 0.0
            for k in range(n_bins):
                fk = bin_freq[k]
                w = min((fk - lo) / (center - lo), (hi - fk) / (hi - center))
                if w > 0.0:
                    acc += w * power[k]
            out[f, m] = math.log(max(acc, params.log_floor))
    return out


# ---------------------------------------------------------------------------
# mel scale and filterbank

def test_mel_scale_closed_form():
    freqs = np.array([0.0, 700.0, 1000.0, 4000.0, 22050.0])
    assert np.allclose(hz_to_mel(freqs), 2595.0 * np.log10(1.0 + freqs / 700.0))
    assert np.allclose(mel_to_hz(hz_to_mel(freqs)), freqs, atol=1e-9)


def test_filter_centers_equally_spaced_in_mel():
    params = FeatureParams(n_mels=32)
    centers = mel_center_frequencies(params)
    mels = hz_to_mel(centers)
    spacing = np.diff(mels)
    assert np.allclose(spacing, spacing[0], rtol=1e-9)


def test_filterbank_shape_and_coverage():
    params = FeatureParams()
    bank = mel_filterbank(params)
    assert bank.shape == (params.n_mels, params.n_fft // 2 + 1)
    assert np.all(bank >= 0.0)
    assert np.all(bank.sum(axis=1) > 0.0)
    # every bin between the first and last centers is covered
    edges = mel_center_frequencies(params)
    bin_freqs = np.arange(bank.shape[1]) * params.sample_rate / params.n_fft
    covered = (bin_freqs > edges[1]) & (bin_freqs < edges[-2])
    assert np.all(bank.sum(axis=0)[covered] > 0.0)
    # adjacent filters overlap
    for i in range(params.n_mels - 1):
        assert np.any((bank[i] > 0.0) & (bank[i + 1] > 0.0))


def test_filterbank_single_band_degenerate():
    params = FeatureParams(n_mels=1)
    bank = mel_filterbank(params)
    assert bank.shape[0] == 1
    assert bank.sum() > 0.0


def test_filterbank_too_many_bands_rejected():
    with pytest.raises(FeatureError, match="empty"):
        mel_filterbank(FeatureParams(n_fft=256, hop=128, n_mels=200))


def test_params_validation():
    with pytest.raises(FeatureError):
        FeatureParams(n_fft=1000).validate()
    with pytest.raises(FeatureError):
        FeatureParams(hop=4096).validate()
    with pytest.raises(FeatureError):
        FeatureParams(fmin=5000.0, fmax=4000.0).validate()
    with pytest.raises(FeatureError):
        FeatureParams(fmax=44100.0).validate()
    with pytest.raises(FeatureError):
        FeatureParams(log_floor=0.0).validate()
    with pytest.raises(FeatureError):
        FeatureParams(n_mels=0).validate()


def test_hann_window_convention():
    w = hann_window(8)
    assert w[0] == 0.0
    n = np.arange(8)
    assert np.allclose(w, 0.5 - 0.5 * np.cos(2.0 * np.pi * n / 8))


# ---------------------------------------------------------------------------
# log_mel

def test_log_mel_matches_bruteforce_oracle():
    params = FeatureParams(n_fft=256, hop=128, n_mels=12, fmax=22050.0)
    rng = np.random.default_rng(42)
    for trial in range(10):
        n = int(rng.integers(params.n_fft, params.n_fft * 2))
        samples = rng.uniform(-1.0, 1.0, n)
        got = log_mel(AudioClip(44100, samples), params).values
        want = oracle_log_mel(samples, params)
        assert got.shape == want.shape
        rel = np.abs(got - want) / np.maximum(np.abs(want), 1e-12)
        assert np.max(rel) <= 1e-6


def test_silence_hits_exact_log_floor():
    params = FeatureParams()
    clip = AudioClip(44100, np.zeros(3 * params.n_fft))
    values = log_mel(clip, params).values
    assert np.all(values == math.log(params.log_floor))


def test_tone_at_filter_center_wins_its_band():
    params = FeatureParams(n_mels=24, fmin=50.0, fmax=8000.0)
    centers = mel_center_frequencies(params)
    band = 10
    t = np.arange(4 * params.n_fft) / params.sample_rate
    clip = AudioClip(44100, 0.5 * np.sin(2.0 * np.pi * centers[band + 1] * t))
    values = log_mel(clip, params).values
    assert np.all(values.argmax(axis=1) == band)


def test_frame_count_formula_and_short_clip():
    params = FeatureParams()
    assert frame_count(params.n_fft, params) == 1
    assert frame_count(params.n_fft + params.hop - 1, params) == 1
    assert frame_count(params.n_fft + params.hop, params) == 2
    n = 5 * 44100
    assert frame_count(n, params) == 1 + (n - params.n_fft) // params.hop
    with pytest.raises(FeatureError, match="shorter"):
        frame_count(params.n_fft - 1, params)
    with pytest.raises(FeatureError, match="shorter"):
        log_mel(AudioClip(44100, np.zeros(100)), params)


def test_rate_mismatch_rejected():
    with pytest.raises(FeatureError, match="rate"):
        log_mel(noise_clip(0.3, seed=0, sample_rate=48000), FeatureParams())


def test_hop_shift_moves_rows():
    params = FeatureParams()
    clip = noise_clip(1.0, seed=3)
    shifted = AudioClip(44100, clip.samples[params.hop:])
    a = log_mel(clip, params).values
    b = log_mel(shifted, params).values
    rows = b.shape[0]
    assert np.max(np.abs(a[1:1 + rows] - b)) <= 1e-9


def test_white_noise_parseval_sanity():
    # total mel power should track the filterbank-weighted spectrum power
    params = FeatureParams()
    clip = noise_clip(2.0, seed=8, amplitude=0.5)
    bank = mel_filterbank(params)
    feats = log_mel(clip, params)
    mel_total = np.exp(feats.values).sum()

    window = hann_window(params.n_fft)
    starts = np.arange(feats.values.shape[0]) * params.hop
    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, params.n_fft)[starts]
    power = np.abs(np.fft.rfft(frames * window, axis=1)) ** 2
    predicted = (power * bank.sum(axis=0)[None, :]).sum()
    assert abs(mel_total - predicted) / predicted <= 0.10


def test_determinism():
    params = FeatureParams()
    clip = noise_clip(0.5, seed=9)
    a = log_mel(clip, params).values
    b = log_mel(clip, params).values
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# divergence

def test_divergence_identity_and_symmetry():
    params = FeatureParams()
    a = log_mel(noise_clip(0.5, seed=1), params)
    b = log_mel(noise_clip(0.5, seed=2), params)
    assert feature_divergence(a, a) == 0.0
    assert feature_divergence(a, b) == feature_divergence(b, a)
    assert feature_divergence(a, b) > 0.0


def test_divergence_constant_offset_closed_form():
    params = FeatureParams()
    a = log_mel(noise_clip(0.5, seed=4), params)
    for c in (0.25, 1.0, -3.0):
        b = LogMel(a.values + c, params)
        want = abs(c) * math.sqrt(params.n_mels)
        assert feature_divergence(a, b) == pytest.approx(want, rel=1e-12)


def test_divergence_shape_mismatch():
    params = FeatureParams()
    a = log_mel(noise_clip(0.5, seed=5), params)
    b = log_mel(noise_clip(0.6, seed=5), params)
    with pytest.raises(FeatureError, match="shape"):
        feature_divergence(a, b)
    with pytest.raises(FeatureError, match="params"):
        feature_divergence(a, LogMel(a.values, FeatureParams(n_mels=32)))


def test_divergence_grows_with_compression_severity():
    # harsher bitrate → larger feature distance, majority vote over clips
    params = FeatureParams()
    lo = parse_codec_spec("ptc-mp3@16")
    hi = parse_codec_spec("ptc-mp3@64")
    wins = 0
    for seed in range(20):
        clip = noise_clip(0.2, seed=100 + seed)
        ref = log_mel(clip, params)
        d_lo = feature_divergence(ref, log_mel(transcode(lo, clip), params))
        d_hi = feature_divergence(ref, log_mel(transcode(hi, clip), params))
        wins += d_lo > d_hi
    assert wins > 10


# ---------------------------------------------------------------------------
# cache

def test_cache_round_trip_quantizes_to_f32(tmp_path):
    params = FeatureParams()
    clip = noise_clip(0.5, seed=6)
    feats = log_mel(clip, params)
    cache = FeatureCache(str(tmp_path))
    key = cache.content_key(clip)
    assert cache.get(key, params) is None
    cache.put(key, params, feats)
    hit = cache.get(key, params)
    assert hit is not None
    want = feats.values.astype(np.float32).astype(np.float64)
    assert np.array_equal(hit.values, want)


def test_cache_distinguishes_params_and_content(tmp_path):
    cache = FeatureCache(str(tmp_path))
    p1 = FeatureParams()
    p2 = FeatureParams(n_mels=32)
    clip1 = noise_clip(0.5, seed=7)
    clip2 = noise_clip(0.5, seed=8)
    cache.put(cache.content_key(clip1), p1, log_mel(clip1, p1))
    assert cache.get(cache.content_key(clip1), p2) is None
    assert cache.get(cache.content_key(clip2), p1) is None
    assert cache.get(cache.content_key(clip1), p1) is not None
