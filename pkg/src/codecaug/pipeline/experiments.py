"""Experiment runners.

Experiment A evaluates trained models against a sweep of evaluation
codecs and relates the accuracy drop to the ODG quality proxy.
Experiment B retrains models under cumulative codec-augmentation
conditions and reports the accuracy recovery on coded evaluations.
Both are deterministic: configs plus seeds fully determine the report.
"""

import json
import os
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from ..audio.manifest import DatasetManifest, ManifestItem, build_synthetic_dataset, load_manifest
from ..audio.wavio import read_wav, write_wav
from ..classifier import ModelConfig, TrainConfig, evaluate, init_model, train
from ..classifier.model import predict, fuse_scores  # noqa: F401 (re-export convenience)
from ..codecs import parse_codec_spec, transcode
from ..errors import CodecaugError, PipelineError
from ..features import FeatureCache, FeatureParams, log_mel
from ..quality import linear_fit, odg_proxy
from .augment import generate_augmented_set, spec_file_tag
from .report import ExperimentReport, summarize_report


@dataclass(frozen=True)
class TrainingCondition:
    """One Table-3-style row: which codecs augment the training set."""

    index: int
    name: str
    augmentation_codecs: tuple = ()
    include_baseline_augmentation: bool = False


def _mix_seed(seed, condition_index, salt):
    return (seed * 1_000_003 + condition_index * 8191 + salt) & 0x7FFFFFFF


def _eval_condition_names(eval_codecs):
    return ["none"] + [str(spec) for spec in eval_codecs]


def pretranscode_eval(manifest: DatasetManifest, spec, cache_dir) -> DatasetManifest:
    """Materialize the eval split through one codec, reusing files on rerun.

    Returns a manifest whose eval items keep their ids and labels but
    point at the transcoded WAVs, so downstream evaluation needs no
    further codec work.
    """
    os.makedirs(cache_dir, exist_ok=True)
    items = []
    for item in manifest.split_items("eval"):
        path = os.path.join(cache_dir, f"{item.clip_id}.wav")
        if not os.path.isfile(path):
            try:
                write_wav(path, transcode(spec, read_wav(item.file_path)))
            except CodecaugError as exc:
                if os.path.isfile(path):
                    os.remove(path)
                raise PipelineError(f"{spec} failed on {item.clip_id}: {exc}") from exc
        items.append(ManifestItem(item.clip_id, path, item.scene_label, "eval", str(spec)))
    return DatasetManifest(
        items=items,
        class_list=list(manifest.class_list),
        category_map=dict(manifest.category_map),
    )


def mean_odg_for_condition(manifest: DatasetManifest, coded: DatasetManifest) -> float:
    """Mean ODG proxy of a pretranscoded eval set against the originals."""
    originals = {i.clip_id: i for i in manifest.split_items("eval")}
    scores = []
    for item in coded.split_items("eval"):
        ref = read_wav(originals[item.clip_id].file_path)
        test = read_wav(item.file_path)
        scores.append(odg_proxy(ref, test).odg)
    return float(np.mean(scores))


def run_experiment_a(
    model10,
    model3,
    manifest: DatasetManifest,
    eval_codecs,
    feature_params: FeatureParams,
    alpha: float = 0.7,
    progress=None,
) -> ExperimentReport:
    """Evaluate already-trained models over uncoded + coded conditions.

    Each eval clip is transcoded once per codec and reused for both the
    accuracy and the ODG average. The report has a single row; the
    scatter fit regresses accuracy on mean ODG over the codec conditions.
    """
    items = manifest.split_items("eval")
    if not items:
        raise PipelineError("eval split is empty")
    labels = list(model10.labels)
    conditions = [None] + list(eval_codecs)

    accuracies = []
    odg_means = []
    for spec in conditions:
        confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
        odg_sum = 0.0
        for item in items:
            try:
                clip = read_wav(item.file_path)
                test = clip if spec is None else transcode(spec, clip)
                feats = log_mel(test, feature_params)
            except CodecaugError as exc:
                name = "none" if spec is None else str(spec)
                raise PipelineError(f"{name} on clip {item.clip_id}: {exc}") from exc
            if spec is not None:
                odg_sum += odg_proxy(clip, test).odg
            post = predict(model10, feats)
            if model3 is not None:
                post = fuse_scores(post, predict(model3, feats), manifest.category_map, alpha)
            confusion[labels.index(item.scene_label), int(np.argmax(post.probabilities))] += 1
        acc = float(np.trace(confusion) / confusion.sum())
        accuracies.append(acc)
        odg_means.append(None if spec is None else odg_sum / len(items))
        if progress is not None:
            name = "none" if spec is None else str(spec)
            progress(f"exp-a eval {name}: accuracy {acc:.3f}")

    return _finish_report_a([accuracies], ["pretrained"], conditions, odg_means, per_seed=None)


def _finish_report_a(matrix, row_names, conditions, odg_means, per_seed):
    names = ["none" if s is None else str(s) for s in conditions]
    fit_slope = fit_intercept = fit_r2 = None
    xs = [o for o in odg_means if o is not None]
    ys = [a for a, o in zip(matrix[-1], odg_means) if o is not None]
    if len(xs) >= 2 and len(set(xs)) > 1:
        fit = linear_fit(xs, ys)
        fit_slope, fit_intercept, fit_r2 = fit.slope, fit.intercept, fit.r_squared
    report = ExperimentReport(
        experiment="a",
        eval_conditions=names,
        row_names=row_names,
        accuracies=[[float(a) for a in row] for row in matrix],
        odg=odg_means,
        fit_slope=fit_slope,
        fit_intercept=fit_intercept,
        fit_r2=fit_r2,
        per_seed=per_seed,
    )
    report.derived = report.recompute_derived()
    return report


def run_experiment_a_multiseed(
    manifest: DatasetManifest,
    eval_codecs,
    feature_params: FeatureParams,
    train_config: TrainConfig,
    seeds,
    model_config: ModelConfig = None,
    with_category_model: bool = False,
    alpha: float = 0.7,
    work_dir=None,
    progress=None,
) -> ExperimentReport:
    """Train fresh models per seed on the plain train split, evaluate
    them across the codec sweep, and report seed-averaged accuracies.

    Eval transcodes are materialized once and shared across seeds; the
    ODG column does not depend on the model, so it is computed once.
    """
    if not seeds:
        raise PipelineError("need at least one seed")
    tmp = None
    if work_dir is None:
        tmp = tempfile.TemporaryDirectory(prefix="expa-")
        work_dir = tmp.name
    try:
        cache = FeatureCache(os.path.join(work_dir, "fcache"))
        eval_manifests = [manifest]
        odg_means = [None]
        for spec in eval_codecs:
            coded = pretranscode_eval(
                manifest, spec, os.path.join(work_dir, "evalcache", spec_file_tag(spec))
            )
            eval_manifests.append(coded)
            odg_means.append(mean_odg_for_condition(manifest, coded))

        per_seed = {"trained": {}}
        rows = []
        for seed in seeds:
            m10 = init_model(replace(model_config or ModelConfig(input_bands=feature_params.n_mels),
                                     n_outputs=10, seed=_mix_seed(seed, 0, 1)))
            train(m10, manifest, feature_params,
                  replace(train_config, seed=_mix_seed(seed, 0, 2)), cache=cache)
            m3 = None
            if with_category_model:
                m3 = init_model(replace(model_config or ModelConfig(input_bands=feature_params.n_mels),
                                        n_outputs=3, seed=_mix_seed(seed, 0, 3)))
                train(m3, manifest, feature_params,
                      replace(train_config, seed=_mix_seed(seed, 0, 4)), cache=cache)
            row = []
            for cond_name, em in zip(_eval_condition_names(eval_codecs), eval_manifests):
                result = evaluate(m10, em, feature_params, model3=m3, alpha=alpha)
                row.append(result.accuracy)
                if progress is not None:
                    progress(f"exp-a seed {seed} eval {cond_name}: accuracy {result.accuracy:.3f}")
            per_seed["trained"][str(seed)] = row
            rows.append(row)
        mean_row = [float(np.mean([r[c] for r in rows])) for c in range(len(rows[0]))]
        return _finish_report_a([mean_row], ["trained"], [None] + list(eval_codecs),
                                odg_means, per_seed)
    finally:
        if tmp is not None:
            tmp.cleanup()


def run_experiment_b(
    conditions,
    eval_codecs,
    manifest: DatasetManifest,
    feature_params: FeatureParams,
    train_config: TrainConfig,
    seeds,
    model_config: ModelConfig = None,
    reference: str = None,
    alpha: float = 0.7,
    with_category_model: bool = False,
    work_dir=None,
    progress=None,
) -> ExperimentReport:
    """Retrain under each augmentation condition and evaluate the sweep.

    Per condition the augmented set is generated once and shared by all
    seeds; per (condition, seed) fresh models are initialized, trained,
    and evaluated on every eval condition. The report row for each
    condition holds seed-averaged accuracies; derived statistics compare
    the final row against the named reference row.
    """
    if len(conditions) < 2:
        raise PipelineError("need a reference and at least one augmented condition")
    names = [c.name for c in conditions]
    if len(set(names)) != len(names):
        raise PipelineError(f"condition names must be unique, got {names}")
    if not seeds:
        raise PipelineError("need at least one seed")
    reference = reference if reference is not None else names[0]
    if reference not in names:
        raise PipelineError(f"reference condition {reference!r} not among {names}")
    if model_config is None:
        model_config = ModelConfig(input_bands=feature_params.n_mels)

    tmp = None
    if work_dir is None:
        tmp = tempfile.TemporaryDirectory(prefix="expb-")
        work_dir = tmp.name
    try:
        cache = FeatureCache(os.path.join(work_dir, "fcache"))
        eval_manifests = [manifest]
        for spec in eval_codecs:
            eval_manifests.append(
                pretranscode_eval(
                    manifest, spec, os.path.join(work_dir, "evalcache", spec_file_tag(spec))
                )
            )
        eval_names = _eval_condition_names(eval_codecs)

        matrix = []
        per_seed = {}
        for cond in conditions:
            if cond.augmentation_codecs or cond.include_baseline_augmentation:
                aug = generate_augmented_set(
                    manifest,
                    list(cond.augmentation_codecs),
                    os.path.join(work_dir, f"cond{cond.index}"),
                    include_baseline=cond.include_baseline_augmentation,
                    progress=progress,
                )
            else:
                aug = None
            per_seed[cond.name] = {}
            seed_rows = []
            for seed in seeds:
                try:
                    m10 = init_model(replace(model_config, n_outputs=10,
                                             seed=_mix_seed(seed, cond.index, 1)))
                    train(m10, manifest, feature_params,
                          replace(train_config, seed=_mix_seed(seed, cond.index, 2)),
                          augmentation_manifest=aug, cache=cache)
                    m3 = None
                    if with_category_model:
                        m3 = init_model(replace(model_config, n_outputs=3,
                                                seed=_mix_seed(seed, cond.index, 3)))
                        train(m3, manifest, feature_params,
                              replace(train_config, seed=_mix_seed(seed, cond.index, 4)),
                              augmentation_manifest=aug, cache=cache)
                    row = []
                    for cond_name, em in zip(eval_names, eval_manifests):
                        result = evaluate(m10, em, feature_params, model3=m3, alpha=alpha)
                        row.append(result.accuracy)
                        if progress is not None:
                            progress(f"[{cond.name}] seed {seed} eval {cond_name}: "
                                     f"accuracy {result.accuracy:.3f}")
                except CodecaugError as exc:
                    raise PipelineError(
                        f"condition {cond.name!r} seed {seed}: {exc}"
                    ) from exc
                per_seed[cond.name][str(seed)] = row
                seed_rows.append(row)
            matrix.append(
                [float(np.mean([r[c] for r in seed_rows])) for c in range(len(eval_names))]
            )

        report = ExperimentReport(
            experiment="b",
            eval_conditions=eval_names,
            row_names=names,
            accuracies=matrix,
            reference_row=names.index(reference),
            per_seed=per_seed,
        )
        report.derived = report.recompute_derived()
        return report
    finally:
        if tmp is not None:
            tmp.cleanup()


def load_experiment_config(path) -> dict:
    """Parse and validate an experiment JSON config into runner inputs.

    Returns a dict with: manifest, feature_params, train_config,
    model_config, conditions, eval_codecs, seeds, reference, alpha,
    with_category_model, out_dir, work_dir.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))

    def _resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    dataset = raw.get("dataset")
    if not isinstance(dataset, dict):
        raise PipelineError("config needs a 'dataset' object")
    if "synthetic" in dataset:
        syn = dataset["synthetic"]
        out = _resolve(syn.get("out_dir", "dataset"))
        manifest = build_synthetic_dataset(
            n_train_per_class=int(syn.get("train_per_class", 100)),
            n_eval_per_class=int(syn.get("eval_per_class", 40)),
            duration=float(syn.get("duration", 3.0)),
            seed=int(syn.get("seed", 7)),
            out_dir=out,
            sample_rate=int(syn.get("sample_rate", 44100)),
        )
    elif "manifest" in dataset:
        manifest = load_manifest(
            _resolve(dataset["manifest"]),
            audio_root=_resolve(dataset["audio_root"]) if "audio_root" in dataset else None,
        )
    else:
        raise PipelineError("dataset must specify 'synthetic' or 'manifest'")

    feature_params = FeatureParams(**raw.get("features", {}))
    feature_params.validate()
    train_config = TrainConfig(**raw.get("train", {}))
    train_config.validate()
    model_config = ModelConfig(
        **{"input_bands": feature_params.n_mels, **raw.get("model", {})}
    )
    model_config.validate()

    conditions = []
    for i, cond in enumerate(raw.get("conditions", [])):
        conditions.append(
            TrainingCondition(
                index=i,
                name=cond["name"],
                augmentation_codecs=tuple(parse_codec_spec(s) for s in cond.get("codecs", [])),
                include_baseline_augmentation=bool(cond.get("baseline_augmentation", False)),
            )
        )
    eval_codecs = [parse_codec_spec(s) for s in raw.get("eval_codecs", [])]
    seeds = [int(s) for s in raw.get("seeds", [0])]

    return {
        "manifest": manifest,
        "feature_params": feature_params,
        "train_config": train_config,
        "model_config": model_config,
        "conditions": conditions,
        "eval_codecs": eval_codecs,
        "seeds": seeds,
        "reference": raw.get("reference"),
        "alpha": float(raw.get("alpha", 0.7)),
        "with_category_model": bool(raw.get("with_category_model", False)),
        "out_dir": _resolve(raw.get("out_dir", "report")),
        "work_dir": _resolve(raw["work_dir"]) if "work_dir" in raw else None,
    }
