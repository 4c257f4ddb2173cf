"""Evaluation: accuracy and confusion matrix over a manifest's eval split."""

from dataclasses import dataclass

import numpy as np

from ..audio.wavio import read_wav
from ..codecs import transcode
from ..errors import CodecaugError, PipelineError
from ..features import log_mel
from .model import Model, fuse_scores, predict


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # rows = truth, columns = predicted
    labels: list

    def per_class_accuracy(self):
        totals = self.confusion.sum(axis=1)
        with np.errstate(invalid="ignore"):
            rates = np.where(totals > 0, np.diag(self.confusion) / totals, np.nan)
        return dict(zip(self.labels, rates.tolist()))


def evaluate(
    model10: Model,
    manifest,
    feature_params,
    codec_condition=None,
    model3: Model = None,
    alpha: float = 0.7,
) -> EvalResult:
    """Classify every eval clip, optionally transcoding it first.

    codec_condition is a CodecSpec (the clip is passed through that
    codec before feature extraction) or None for the uncoded condition.
    With model3 present the 10-class and 3-class posteriors are fused.
    Clips are processed in manifest order; accuracy equals
    trace(confusion)/sum(confusion) by construction.
    """
    items = manifest.split_items("eval")
    if not items:
        raise PipelineError("eval split is empty")
    labels = list(model10.labels)
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)

    for item in items:
        try:
            clip = read_wav(item.file_path)
            if codec_condition is not None:
                clip = transcode(codec_condition, clip)
            feats = log_mel(clip, feature_params)
        except CodecaugError as exc:
            raise PipelineError(f"clip {item.clip_id}: {exc}") from exc
        post = predict(model10, feats)
        if model3 is not None:
            post = fuse_scores(post, predict(model3, feats), manifest.category_map, alpha)
        truth = labels.index(item.scene_label)
        confusion[truth, int(np.argmax(post.probabilities))] += 1

    return EvalResult(float(np.trace(confusion) / confusion.sum()), confusion, labels)
