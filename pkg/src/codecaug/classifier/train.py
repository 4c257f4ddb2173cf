"""Deterministic mini-batch training (SGD + momentum, cosine schedule).

train() goes from a dataset manifest to a trained model: it extracts
log-mel features for the training split, fits per-band normalization
statistics on that split only, and runs the optimizer. fit_features()
is the bare loop over in-memory feature matrices, useful for toy
problems and tests.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..audio.wavio import read_wav
from ..errors import CodecaugError, TrainingError
from ..features import FeatureCache, log_mel
from .layers import SoftmaxCrossEntropy, backward_network, collect_grads, forward_network
from .model import Model

NORM_STD_FLOOR = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 60
    batch_size: int = 16
    learning_rate: float = 0.05
    lr_schedule: str = "cosine"  # "cosine" | "constant"
    momentum: float = 0.9
    seed: int = 0
    crop_frames: int = 64

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1 or self.crop_frames < 1:
            raise TrainingError(
                f"epochs/batch_size/crop_frames must be positive, got "
                f"{self.epochs}/{self.batch_size}/{self.crop_frames}"
            )
        if self.learning_rate <= 0:
            raise TrainingError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise TrainingError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.lr_schedule not in ("cosine", "constant"):
            raise TrainingError(f"unknown lr_schedule {self.lr_schedule!r}")


def _lr_at(config: TrainConfig, epoch: int) -> float:
    if config.lr_schedule == "constant":
        return config.learning_rate
    return 0.5 * config.learning_rate * (1.0 + math.cos(math.pi * epoch / config.epochs))


def _wrapped_crop(values, crop, start):
    n = len(values)
    idx = (start + np.arange(crop)) % n
    return values[idx]


def fit_features(model: Model, feats, labels, config: TrainConfig, progress=None):
    """Optimize model parameters on in-memory features.

    feats: list of frames x bands float arrays (already normalized);
    labels: int class indices aligned with feats. Returns a history dict
    with per-epoch mean loss and train accuracy. Deterministic given
    config.seed: fixed shuffle, crop, and reduction order.
    """
    config.validate()
    if len(feats) == 0:
        raise TrainingError("no training items")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= model.config.n_outputs:
        raise TrainingError(
            f"label indices must be in [0, {model.config.n_outputs}), "
            f"got range [{labels.min()}, {labels.max()}]"
        )

    rng = np.random.default_rng(config.seed)
    params = model.parameters
    dtype = params[0].dtype
    velocity = [np.zeros_like(p) for p in params]
    loss_layer = SoftmaxCrossEntropy()
    n = len(feats)
    history = {"loss": [], "accuracy": []}

    for epoch in range(config.epochs):
        lr = dtype.type(_lr_at(config, epoch))
        mu = dtype.type(config.momentum)
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for batch_no, b0 in enumerate(range(0, n, config.batch_size)):
            idx = order[b0:b0 + config.batch_size]
            starts = rng.integers(0, [len(feats[i]) for i in idx])
            x = np.stack(
                [_wrapped_crop(feats[i], config.crop_frames, s) for i, s in zip(idx, starts)]
            ).astype(dtype)[:, None]
            y = labels[idx]

            logits = forward_network(model.layers, x)
            loss, probs = loss_layer.forward(logits, y)
            if not math.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss {loss}", epoch=epoch, batch=batch_no
                )
            backward_network(model.layers, loss_layer.backward())
            for p, v, g in zip(params, velocity, collect_grads(model.layers)):
                v *= mu
                v -= lr * g
                p += v

            loss_sum += loss * len(idx)
            correct += int(np.sum(probs.argmax(axis=1) == y))
        history["loss"].append(loss_sum / n)
        history["accuracy"].append(correct / n)
        if progress is not None:
            progress(epoch, history["loss"][-1], history["accuracy"][-1])
    return history


def _target_index(model: Model, manifest, scene_label: str) -> int:
    if model.config.n_outputs == 3:
        label = manifest.category_map.get(scene_label)
        if label is None:
            raise TrainingError(f"scene label {scene_label!r} has no category mapping")
    else:
        label = scene_label
    try:
        return model.labels.index(label)
    except ValueError:
        raise TrainingError(f"label {label!r} not in model vocabulary") from None


def extract_features(items, feature_params, cache: FeatureCache = None):
    """Log-mel matrices for manifest items, optionally via an on-disk cache."""
    feats = []
    for item in items:
        clip = read_wav(item.file_path)
        if cache is not None:
            key = cache.content_key(clip)
            hit = cache.get(key, feature_params)
            if hit is None:
                hit = log_mel(clip, feature_params)
                cache.put(key, feature_params, hit)
                # rounds fresh values the same way the cache stores them,
                # so warm and cold runs see identical inputs
                feats.append(hit.values.astype(np.float32).astype(np.float64))
            else:
                feats.append(hit.values)
        else:
            feats.append(log_mel(clip, feature_params).values)
    return feats


def fit_norm(feats):
    """Per-band mean/std over all frames of all matrices (float64)."""
    count = 0
    s1 = 0.0
    s2 = 0.0
    for values in feats:
        count += len(values)
        s1 = s1 + values.sum(axis=0)
        s2 = s2 + (values ** 2).sum(axis=0)
    mean = s1 / count
    var = np.maximum(s2 / count - mean ** 2, 0.0)
    std = np.maximum(np.sqrt(var), NORM_STD_FLOOR)
    return mean, std


def train(
    model: Model,
    manifest,
    feature_params,
    train_config: TrainConfig,
    augmentation_manifest=None,
    cache: FeatureCache = None,
    progress=None,
):
    """Train on a manifest's train split; returns (model, history).

    When augmentation_manifest is given its train split (originals plus
    augmented copies) replaces the plain one. Feature normalization is
    fit on that training split only, so the eval split can never leak
    into the model.
    """
    source = augmentation_manifest if augmentation_manifest is not None else manifest
    items = source.split_items("train")
    if not items:
        raise TrainingError("training split is empty")
    present = {item.scene_label for item in items}
    for label in source.class_list:
        if label not in present:
            raise TrainingError(f"class {label!r} has no training items")

    targets = [_target_index(model, source, item.scene_label) for item in items]
    try:
        feats = extract_features(items, feature_params, cache)
    except CodecaugError as exc:
        raise TrainingError(f"feature extraction failed: {exc}") from exc

    mean, std = fit_norm(feats)
    model.feature_norm = (mean, std)
    normalized = [((values - mean) / std).astype(np.float32) for values in feats]

    history = fit_features(model, normalized, targets, train_config, progress=progress)
    return model, history
