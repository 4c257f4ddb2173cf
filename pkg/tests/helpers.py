"""Shared clip builders for the test suite."""

import numpy as np

from codecaug.audio.clip import AudioClip

SAMPLE_RATE = 44100


def tone_clip(freq=997.0, duration=1.0, amplitude=0.5, sample_rate=SAMPLE_RATE):
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    return AudioClip(sample_rate, amplitude * np.sin(2.0 * np.pi * freq * t))


def noise_clip(duration=1.0, seed=0, amplitude=0.3, sample_rate=SAMPLE_RATE):
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    return AudioClip(sample_rate, amplitude * rng.uniform(-1.0, 1.0, n))


def add_noise_db(clip, level_db, seed=0):
    """clip + white noise at level_db relative to the clip's RMS."""
    rng = np.random.default_rng(seed)
    rms = float(np.sqrt(np.mean(clip.samples ** 2)))
    noise = rng.standard_normal(clip.samples.size)
    noise *= rms * 10.0 ** (level_db / 20.0) / np.sqrt(np.mean(noise ** 2))
    return AudioClip(clip.sample_rate, np.clip(clip.samples + noise, -1.0, 1.0))


def numeric_grad(f, x, eps=1e-5):
    """Central-difference gradient of scalar f() w.r.t. array x, mutated
    in place element by element."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + eps
        fp = f()
        x[idx] = orig - eps
        fm = f()
        x[idx] = orig
        grad[idx] = (fp - fm) / (2.0 * eps)
    return grad


def assert_grads_close(analytic, numeric, tol=1e-4):
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    worst = float(np.max(np.abs(analytic - numeric) / denom))
    assert worst <= tol, f"gradient mismatch: relative error {worst:.3e}"
