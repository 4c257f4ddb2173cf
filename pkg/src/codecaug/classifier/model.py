"""Scene classifier model: configuration, init, prediction, score fusion.

The network is a small fully-convolutional stack: per conv block a 3x3
convolution + ReLU + 2x2 max pool, then global average pooling, one
hidden dense layer, and a linear output head. Global average pooling
makes prediction length-agnostic, so evaluation consumes the whole
feature matrix while training uses fixed random crops.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..audio.labels import CATEGORY_LIST, CLASS_LIST
from ..errors import ModelError
from ..features import LogMel
from .layers import (
    Conv2D,
    Dense,
    GlobalAvgPool,
    MaxPool2,
    ReLU,
    collect_params,
    forward_network,
    softmax,
)


@dataclass(frozen=True)
class ModelConfig:
    """Architecture knobs. conv_channels lists the per-block channel
    counts; every block is conv 3x3 -> ReLU -> max pool 2x2."""

    input_bands: int = 64
    conv_channels: tuple = (16, 32)
    hidden_units: int = 64
    n_outputs: int = 10
    seed: int = 0

    def validate(self):
        if self.n_outputs not in (3, 10):
            raise ModelError(f"n_outputs must be 3 or 10, got {self.n_outputs}")
        if len(self.conv_channels) < 1:
            raise ModelError("need at least one conv block")
        if any(int(c) < 1 for c in self.conv_channels):
            raise ModelError(f"conv channels must be positive, got {self.conv_channels}")
        if self.hidden_units < 1:
            raise ModelError(f"hidden_units must be positive, got {self.hidden_units}")
        # each pool halves the band axis; the stack must not collapse it
        if self.input_bands < 2 ** len(self.conv_channels):
            raise ModelError(
                f"input_bands={self.input_bands} too small for "
                f"{len(self.conv_channels)} pooling stages"
            )


@dataclass
class Posterior:
    """Probability vector over scene classes (10) or categories (3)."""

    probabilities: np.ndarray
    labels: list

    def check(self):
        p = self.probabilities
        if np.any(p < 0):
            raise ModelError("posterior has negative entries")
        if abs(float(p.sum()) - 1.0) > 1e-6:
            raise ModelError(f"posterior sums to {float(p.sum())}, not 1")

    def top_label(self):
        # ties resolve to the lowest class index
        return self.labels[int(np.argmax(self.probabilities))]


@dataclass
class Model:
    config: ModelConfig
    layers: list = field(repr=False)
    labels: list
    feature_norm: tuple = None  # (mean, std) per band, set by training

    @property
    def parameters(self):
        return collect_params(self.layers)


def build_layers(config: ModelConfig, rng=None, dtype=np.float32):
    """Instantiate the layer stack; weights from a seeded uniform fan-in
    scheme when an rng is given, zeros otherwise.

    The output head starts at zero either way, so a freshly initialized
    model emits an exactly uniform posterior for any input.
    """

    def uniform(fan_in, shape):
        if rng is None:
            return np.zeros(shape, dtype=dtype)
        limit = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-limit, limit, size=shape).astype(dtype)

    layers = []
    c_in = 1
    for c_out in config.conv_channels:
        c_out = int(c_out)
        layers.append(
            Conv2D(c_in, c_out, uniform(c_in * 9, (c_in * 9, c_out)), np.zeros(c_out, dtype=dtype))
        )
        layers.append(ReLU())
        layers.append(MaxPool2())
        c_in = c_out
    layers.append(GlobalAvgPool())
    layers.append(
        Dense(
            c_in,
            config.hidden_units,
            uniform(c_in, (c_in, config.hidden_units)),
            np.zeros(config.hidden_units, dtype=dtype),
        )
    )
    layers.append(ReLU())
    layers.append(
        Dense(
            config.hidden_units,
            config.n_outputs,
            np.zeros((config.hidden_units, config.n_outputs), dtype=dtype),
            np.zeros(config.n_outputs, dtype=dtype),
        )
    )
    return layers


def init_model(config: ModelConfig) -> Model:
    """Deterministically initialized model; same seed, same bits."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    layers = build_layers(config, rng=rng)
    labels = list(CLASS_LIST) if config.n_outputs == 10 else list(CATEGORY_LIST)
    return Model(config=config, layers=layers, labels=labels)


def _prepare_input(model: Model, values: np.ndarray, crop_frames=None):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ModelError(f"features must be frames x bands, got shape {values.shape}")
    if values.shape[1] != model.config.input_bands:
        raise ModelError(
            f"feature bands {values.shape[1]} != model input_bands "
            f"{model.config.input_bands}"
        )
    if model.feature_norm is not None:
        mean, std = model.feature_norm
        values = (values - mean) / std

    min_frames = 2 ** len(model.config.conv_channels)
    target = crop_frames if crop_frames is not None else max(len(values), min_frames)
    target = max(int(target), min_frames)
    n = len(values)
    if n < target:
        values = np.tile(values, (int(np.ceil(target / n)), 1))[:target]
    elif n > target:
        start = (n - target) // 2  # center crop
        values = values[start:start + target]
    dtype = model.parameters[0].dtype
    return values.astype(dtype)[None, None, :, :]


def predict(model: Model, features, crop_frames=None) -> Posterior:
    """Posterior over model.labels for one clip's features.

    Accepts a LogMel or a raw frames x bands array. Input is normalized
    with the model's trained feature statistics when present and, if
    crop_frames is given, center-cropped (or tiled) to that length;
    otherwise all frames are consumed.
    """
    values = features.values if isinstance(features, LogMel) else features
    x = _prepare_input(model, values, crop_frames)
    logits = forward_network(model.layers, x, inference=True)
    post = Posterior(softmax(logits[0].astype(np.float64)), list(model.labels))
    post.check()
    return post


def fuse_scores(post10: Posterior, post3: Posterior, category_map, alpha=0.7) -> Posterior:
    """Geometric score fusion: fused(c) proportional to
    post10(c)**alpha * post3(category(c))**(1-alpha), renormalized."""
    if not 0.0 <= alpha <= 1.0:
        raise ModelError(f"alpha must be in [0, 1], got {alpha}")
    for label in post10.labels:
        if category_map.get(label) not in post3.labels:
            raise ModelError(f"class {label!r} has no category in the fusion map")
    if alpha == 1.0:
        return Posterior(post10.probabilities.copy(), list(post10.labels))

    cat_idx = [post3.labels.index(category_map[c]) for c in post10.labels]
    fused = post10.probabilities ** alpha * post3.probabilities[cat_idx] ** (1.0 - alpha)
    mass = float(fused.sum())
    if mass <= 0.0:
        raise ModelError("fused posterior has zero mass")
    return Posterior(fused / mass, list(post10.labels))
