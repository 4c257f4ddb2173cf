"""Experiment runner mechanics at toy scale: determinism, caching,
config parsing, and error context. Directional accuracy claims live in
the acceptance tests; here the datasets are far too small for those."""

import json
import os

import numpy as np
import pytest

from codecaug.classifier import ModelConfig, TrainConfig, init_model, train
from codecaug.codecs import parse_codec_spec
from codecaug.errors import PipelineError
from codecaug.features import FeatureParams
from codecaug.pipeline import (
    load_experiment_config,
    pretranscode_eval,
    run_experiment_a,
    run_experiment_a_multiseed,
    run_experiment_b,
)
from codecaug.pipeline.experiments import TrainingCondition
from codecaug.pipeline.report import report_to_json

TINY_PARAMS = FeatureParams(n_fft=1024, hop=512, n_mels=16)
TINY_MODEL = ModelConfig(input_bands=16, conv_channels=(4,), hidden_units=8, seed=0)
TINY_TRAIN = TrainConfig(epochs=2, batch_size=8, crop_frames=16, seed=0)


def _tiny_conditions():
    return [
        TrainingCondition(0, "plain", ()),
        TrainingCondition(1, "aug", (parse_codec_spec("ptc-mp3@64"),),
                          include_baseline_augmentation=True),
    ]


def test_experiment_b_report_shape_and_determinism(tiny_dataset, tmp_path):
    evals = [parse_codec_spec("ptc-mp3@64")]
    kwargs = dict(
        conditions=_tiny_conditions(), eval_codecs=evals, manifest=tiny_dataset,
        feature_params=TINY_PARAMS, train_config=TINY_TRAIN, seeds=[0],
        model_config=TINY_MODEL)
    first = run_experiment_b(work_dir=str(tmp_path / "w1"), **kwargs)

    assert first.experiment == "b"
    assert first.row_names == ["plain", "aug"]
    assert first.eval_conditions == ["none", "ptc-mp3@64"]
    assert first.reference_row == 0
    assert all(0.0 <= a <= 1.0 for row in first.accuracies for a in row)
    assert set(first.per_seed) == {"plain", "aug"}
    assert first.per_seed["plain"]["0"] == first.accuracies[0]
    assert first.derived["relative_increase"] is not None

    # warm rerun in the same work dir and a cold run in a fresh one
    # must both reproduce the report byte for byte
    warm = run_experiment_b(work_dir=str(tmp_path / "w1"), **kwargs)
    cold = run_experiment_b(work_dir=str(tmp_path / "w2"), **kwargs)
    assert report_to_json(warm) == report_to_json(first)
    assert report_to_json(cold) == report_to_json(first)


def test_experiment_b_with_category_model(tiny_dataset, tmp_path):
    report = run_experiment_b(
        _tiny_conditions(), [], tiny_dataset, TINY_PARAMS, TINY_TRAIN, [0],
        model_config=TINY_MODEL, with_category_model=True,
        work_dir=str(tmp_path / "w"))
    assert report.eval_conditions == ["none"]
    assert len(report.accuracies) == 2


def test_experiment_b_validation(tiny_dataset, tmp_path):
    conds = _tiny_conditions()
    with pytest.raises(PipelineError, match="reference"):
        run_experiment_b(conds[:1], [], tiny_dataset, TINY_PARAMS, TINY_TRAIN, [0])
    with pytest.raises(PipelineError, match="unique"):
        run_experiment_b(
            [conds[0], TrainingCondition(1, "plain")], [], tiny_dataset,
            TINY_PARAMS, TINY_TRAIN, [0])
    with pytest.raises(PipelineError, match="seed"):
        run_experiment_b(conds, [], tiny_dataset, TINY_PARAMS, TINY_TRAIN, [])
    with pytest.raises(PipelineError, match="nope"):
        run_experiment_b(conds, [], tiny_dataset, TINY_PARAMS, TINY_TRAIN, [0],
                         reference="nope")


def test_experiment_b_wraps_errors_with_condition_context(tiny_dataset, tmp_path):
    diverging = TrainConfig(epochs=1, batch_size=8, crop_frames=16,
                            learning_rate=1e30, lr_schedule="constant")
    with np.errstate(all="ignore"), pytest.raises(
            PipelineError, match=r"condition 'plain' seed 0"):
        run_experiment_b(_tiny_conditions(), [], tiny_dataset, TINY_PARAMS,
                         diverging, [0], model_config=TINY_MODEL,
                         work_dir=str(tmp_path / "w"))


def test_pretranscode_eval_reuses_files(tiny_dataset, tmp_path):
    spec = parse_codec_spec("ptc-mp3@64")
    cache = str(tmp_path / "cache")
    coded = pretranscode_eval(tiny_dataset, spec, cache)
    n_eval = len(tiny_dataset.split_items("eval"))
    assert len(coded.split_items("eval")) == n_eval
    assert all(i.codec_tag == "ptc-mp3@64" for i in coded.split_items("eval"))
    stamps = {p: os.stat(os.path.join(cache, p)).st_mtime_ns
              for p in os.listdir(cache)}
    again = pretranscode_eval(tiny_dataset, spec, cache)
    assert [i.file_path for i in again.items] == [i.file_path for i in coded.items]
    assert {p: os.stat(os.path.join(cache, p)).st_mtime_ns
            for p in os.listdir(cache)} == stamps


def _quick_model(manifest, tmp_path):
    model = init_model(ModelConfig(input_bands=16, conv_channels=(4,),
                                   hidden_units=8, n_outputs=10, seed=3))
    train(model, manifest, TINY_PARAMS,
          TrainConfig(epochs=1, batch_size=8, crop_frames=16, seed=3))
    return model


def test_experiment_a_single_codec_has_no_fit(tiny_dataset, tmp_path):
    model = _quick_model(tiny_dataset, tmp_path)
    report = run_experiment_a(model, None, tiny_dataset,
                              [parse_codec_spec("ptc-mp3@64")], TINY_PARAMS)
    assert report.experiment == "a"
    assert report.eval_conditions == ["none", "ptc-mp3@64"]
    assert report.odg[0] is None and report.odg[1] < 0.0
    # one (odg, accuracy) point cannot define a line
    assert report.fit_r2 is None


def test_experiment_a_empty_sweep(tiny_dataset, tmp_path):
    model = _quick_model(tiny_dataset, tmp_path)
    report = run_experiment_a(model, None, tiny_dataset, [], TINY_PARAMS)
    assert report.eval_conditions == ["none"]
    assert report.derived["relative_decrease"] == [[]]


def test_experiment_a_multiseed_fits_and_averages(tiny_dataset, tmp_path):
    evals = [parse_codec_spec("ptc-mp3@64"), parse_codec_spec("ptc-mp3@16")]
    report = run_experiment_a_multiseed(
        tiny_dataset, evals, TINY_PARAMS, TINY_TRAIN, [0, 1],
        model_config=TINY_MODEL, work_dir=str(tmp_path / "w"))
    assert report.row_names == ["trained"]
    per_seed = report.per_seed["trained"]
    assert set(per_seed) == {"0", "1"}
    for c in range(3):
        mean = (per_seed["0"][c] + per_seed["1"][c]) / 2.0
        assert abs(report.accuracies[0][c] - mean) < 1e-12
    # two distinct odg points -> the scatter fit exists
    assert report.fit_r2 is not None
    assert report.odg[1] > report.odg[2]  # 16 kbps hurts more than 64


def test_load_experiment_config_resolves_and_parses(tmp_path):
    config = {
        "dataset": {"synthetic": {"train_per_class": 1, "eval_per_class": 1,
                                  "duration": 0.5, "seed": 3, "out_dir": "ds"}},
        "features": {"n_fft": 1024, "hop": 512, "n_mels": 16},
        "train": {"epochs": 2, "batch_size": 8, "crop_frames": 16},
        "model": {"conv_channels": [4], "hidden_units": 8},
        "conditions": [
            {"name": "plain"},
            {"name": "aug", "codecs": ["ptc-mp3@64"], "baseline_augmentation": True},
        ],
        "eval_codecs": ["ptc-mp3@64", "sbc@64"],
        "seeds": [0, 1],
        "out_dir": "rep",
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(config))
    loaded = load_experiment_config(str(path))

    assert len(loaded["manifest"].items) == 20
    assert loaded["feature_params"].n_mels == 16
    assert loaded["train_config"].epochs == 2
    assert loaded["model_config"].input_bands == 16
    conds = loaded["conditions"]
    assert [c.name for c in conds] == ["plain", "aug"]
    assert conds[1].index == 1
    assert [str(s) for s in conds[1].augmentation_codecs] == ["ptc-mp3@64"]
    assert conds[1].include_baseline_augmentation is True
    assert [str(s) for s in loaded["eval_codecs"]] == ["ptc-mp3@64", "sbc@64"]
    assert loaded["seeds"] == [0, 1]
    assert loaded["alpha"] == 0.7
    assert loaded["reference"] is None
    assert loaded["with_category_model"] is False
    assert loaded["out_dir"] == str(tmp_path / "rep")
    assert loaded["work_dir"] is None
    # dataset files landed next to the config file
    assert os.path.isdir(str(tmp_path / "ds"))


def test_load_experiment_config_manifest_source(tiny_dataset, tmp_path):
    meta = None
    for item in tiny_dataset.items:
        candidate = os.path.join(os.path.dirname(item.file_path), "..", "meta.tsv")
        if os.path.isfile(candidate):
            meta = os.path.abspath(candidate)
            break
    assert meta is not None
    config = {"dataset": {"manifest": meta}, "conditions": [], "seeds": [1]}
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(config))
    loaded = load_experiment_config(str(path))
    assert len(loaded["manifest"].items) == len(tiny_dataset.items)


def test_load_experiment_config_rejects_bad_dataset(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"conditions": []}))
    with pytest.raises(PipelineError, match="dataset"):
        load_experiment_config(str(path))
    path.write_text(json.dumps({"dataset": {"foo": 1}}))
    with pytest.raises(PipelineError, match="synthetic"):
        load_experiment_config(str(path))
