"""Augmentation pipeline: codec copies, baseline jitter, subset selection."""

import os

import numpy as np
import pytest

from codecaug.audio.manifest import DatasetManifest, load_manifest
from codecaug.audio.wavio import read_wav
from codecaug.codecs import parse_codec_spec
from codecaug.errors import PipelineError
from codecaug.features import FeatureParams, feature_divergence, log_mel
from codecaug.pipeline import generate_augmented_set, select_codec_subset
from codecaug.pipeline.augment import (
    apply_baseline_augmentation,
    spec_file_tag,
)
from helpers import noise_clip

SMALL_PARAMS = FeatureParams(n_fft=1024, hop=512, n_mels=16)


def test_baseline_augmentation_is_seeded_and_bounded():
    clip = noise_clip(0.4, seed=1)
    a = apply_baseline_augmentation(clip, 7)
    b = apply_baseline_augmentation(clip, 7)
    c = apply_baseline_augmentation(clip, 8)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)
    assert np.all(np.abs(a.samples) <= 1.0)
    assert a.samples.size == clip.samples.size
    # level stays within the gain-jitter envelope (plus a little noise)
    rms_ratio = np.sqrt(np.mean(a.samples ** 2) / np.mean(clip.samples ** 2))
    assert 10.0 ** (-3.2 / 20.0) <= rms_ratio <= 10.0 ** (3.2 / 20.0)


def test_spec_file_tag_is_safe_and_collision_free():
    a = spec_file_tag(parse_codec_spec("ptc-mp3@64"))
    b = spec_file_tag(parse_codec_spec("ptc-mp3@64;window=512"))
    assert a != b
    for tag in (a, b):
        assert all(ch.isalnum() or ch in "._-" for ch in tag)


def test_generate_augmented_set_counts_and_tags(tiny_dataset, tmp_path):
    manifest = tiny_dataset
    codecs = [parse_codec_spec("ptc-mp3@64"), parse_codec_spec("sbc@64")]
    out = str(tmp_path / "aug")
    grown = generate_augmented_set(manifest, codecs, out)

    n_train = len(manifest.split_items("train"))
    n_eval = len(manifest.split_items("eval"))
    assert len(grown.items) == n_train * (1 + len(codecs)) + n_eval
    assert len(grown.split_items("eval")) == n_eval

    tags = {item.codec_tag for item in grown.split_items("train")}
    assert tags == {"none", "ptc-mp3@64", "sbc@64"}
    # every augmented file decodes and matches the original length
    for item in grown.split_items("train"):
        if item.codec_tag != "none":
            clip = read_wav(item.file_path)
            assert clip.samples.size > 0
    reloaded = load_manifest(os.path.join(out, "meta.tsv"))
    assert len(reloaded.items) == len(grown.items)


def test_generate_augmented_set_leaves_eval_untouched(tiny_dataset, tmp_path):
    manifest = tiny_dataset
    grown = generate_augmented_set(manifest, [parse_codec_spec("ptc-mp3@64")],
                                   str(tmp_path / "aug"))
    assert grown.split_items("eval") == manifest.split_items("eval")
    eval_dirs = {os.path.dirname(i.file_path) for i in grown.split_items("eval")}
    assert str(tmp_path / "aug") not in {os.path.dirname(d) for d in eval_dirs}


def test_generate_augmented_set_baseline_block(tiny_dataset, tmp_path):
    manifest = tiny_dataset
    grown = generate_augmented_set(manifest, [], str(tmp_path / "aug"),
                                   include_baseline=True)
    n_train = len(manifest.split_items("train"))
    n_eval = len(manifest.split_items("eval"))
    assert len(grown.items) == 2 * n_train + n_eval
    assert sum(1 for i in grown.items if i.codec_tag == "baseline") == n_train


def test_baseline_block_covers_coded_copies(tiny_dataset, tmp_path):
    manifest = tiny_dataset
    grown = generate_augmented_set(manifest, [parse_codec_spec("ptc-mp3@64")],
                                   str(tmp_path / "aug"), include_baseline=True)
    n_train = len(manifest.split_items("train"))
    n_eval = len(manifest.split_items("eval"))
    assert len(grown.items) == 2 * n_train * 2 + n_eval
    tags = {}
    for item in grown.split_items("train"):
        tags[item.codec_tag] = tags.get(item.codec_tag, 0) + 1
    assert tags == {
        "none": n_train,
        "ptc-mp3@64": n_train,
        "baseline": n_train,
        "ptc-mp3@64+baseline": n_train,
    }
    # the jittered transcode differs from the plain transcode
    coded = {i.clip_id: i for i in grown.items if i.codec_tag == "ptc-mp3@64"}
    for item in grown.items:
        if item.codec_tag == "ptc-mp3@64+baseline":
            source = coded[item.clip_id.rsplit("__", 1)[0]]
            a = read_wav(item.file_path).samples
            b = read_wav(source.file_path).samples
            assert a.size == b.size
            assert not np.array_equal(a, b)


def test_generate_augmented_set_aborts_cleanly(tiny_dataset, tmp_path):
    manifest = tiny_dataset
    out = str(tmp_path / "aug")
    # 22050 Hz-only clips cannot happen here, so force failure with an
    # unsupported sample rate by injecting a broken item
    broken = DatasetManifest(
        items=list(manifest.items), class_list=list(manifest.class_list),
        category_map=dict(manifest.category_map))
    broken.items[0] = broken.items[0].__class__(
        broken.items[0].clip_id, str(tmp_path / "missing.wav"),
        broken.items[0].scene_label, "train", "")
    with pytest.raises((PipelineError, OSError)):
        generate_augmented_set(broken, [parse_codec_spec("ptc-mp3@64")], out)
    leftovers = []
    if os.path.isdir(os.path.join(out, "audio")):
        leftovers = os.listdir(os.path.join(out, "audio"))
    assert leftovers == []


def test_generate_augmented_set_requires_train_items(tiny_dataset, tmp_path):
    manifest = tiny_dataset
    eval_only = DatasetManifest(
        items=list(manifest.split_items("eval")),
        class_list=list(manifest.class_list),
        category_map=dict(manifest.category_map))
    with pytest.raises(PipelineError, match="train"):
        generate_augmented_set(eval_only, [], str(tmp_path / "aug"))


# ---------------------------------------------------------------------------
# codec subset selection

def _divergence_matrix(items, candidates, params):
    originals = [log_mel(read_wav(i.file_path), params) for i in items]
    coded = []
    from codecaug.codecs import transcode
    for spec in candidates:
        coded.append([log_mel(transcode(spec, read_wav(i.file_path)), params)
                      for i in items])
    score = [float(np.mean([feature_divergence(o, f)
                            for o, f in zip(originals, row)])) for row in coded]
    n = len(candidates)
    dist = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            d = float(np.mean([feature_divergence(x, y)
                               for x, y in zip(coded[a], coded[b])]))
            dist[a, b] = dist[b, a] = d
    return score, dist


def test_subset_selection_k1_takes_max_divergence(tiny_dataset):
    items = tiny_dataset.split_items("train")[:4]
    candidates = [parse_codec_spec(s) for s in
                  ("ptc-mp3@128", "ptc-mp3@16", "ptc-aac@64")]
    picked = select_codec_subset(items, candidates, 1, SMALL_PARAMS)
    score, _ = _divergence_matrix(items, candidates, SMALL_PARAMS)
    assert picked == [candidates[int(np.argmax(score))]]


def test_subset_selection_k2_matches_greedy_oracle(tiny_dataset):
    items = tiny_dataset.split_items("train")[:3]
    candidates = [parse_codec_spec(s) for s in
                  ("ptc-mp3@64", "ptc-mp3@16", "ptc-aac@32", "sbc@64")]
    picked = select_codec_subset(items, candidates, 2, SMALL_PARAMS)
    score, dist = _divergence_matrix(items, candidates, SMALL_PARAMS)
    first = int(np.argmax(score))
    rest = [c for c in range(len(candidates)) if c != first]
    second = max(rest, key=lambda c: (dist[c, first], -c))
    assert picked == [candidates[first], candidates[second]]


def test_subset_selection_validation(tiny_dataset):
    items = tiny_dataset.split_items("train")[:2]
    candidates = [parse_codec_spec("ptc-mp3@64")]
    with pytest.raises(PipelineError, match="k must be"):
        select_codec_subset(items, candidates, 2, SMALL_PARAMS)
    with pytest.raises(PipelineError, match="empty"):
        select_codec_subset([], candidates, 1, SMALL_PARAMS)
