"""Desk-scale scene classifier: model, training, evaluation, persistence."""

from .evaluate import EvalResult, evaluate
from .model import Model, ModelConfig, Posterior, fuse_scores, init_model, predict
from .model_io import load_model, save_model
from .train import TrainConfig, extract_features, fit_features, train

__all__ = [
    "EvalResult",
    "Model",
    "ModelConfig",
    "Posterior",
    "TrainConfig",
    "evaluate",
    "extract_features",
    "fit_features",
    "fuse_scores",
    "init_model",
    "load_model",
    "predict",
    "save_model",
    "train",
]
