"""Mono audio clip type used throughout the toolkit."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AudioClip:
    """Mono PCM audio: float64 samples in [-1, +1] at a fixed sample rate."""

    sample_rate: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"samples must be 1-D mono, got shape {self.samples.shape}")

    @property
    def channel_count(self) -> int:
        return 1

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self):
        return len(self.samples)

    def clipped(self) -> "AudioClip":
        """Copy with samples hard-limited to [-1, +1]."""
        return AudioClip(self.sample_rate, np.clip(self.samples, -1.0, 1.0))

    def validate(self):
        """Check the in-range/finite invariant (applied after load or decode)."""
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("clip contains non-finite samples")
        if len(self.samples) and (self.samples.max() > 1.0 or self.samples.min() < -1.0):
            raise ValueError("clip samples exceed [-1, +1]")
