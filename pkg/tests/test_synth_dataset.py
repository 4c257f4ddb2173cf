import filecmp
import os

import numpy as np
import pytest

from codecaug.audio.labels import CATEGORY_LIST, CLASS_LIST, DEFAULT_CATEGORY_MAP
from codecaug.audio.manifest import (
    DatasetManifest,
    ManifestItem,
    build_synthetic_dataset,
    load_dcase_manifest,
    load_manifest,
    save_manifest,
)
from codecaug.audio.synth import DEFAULT_RECIPES, SceneRecipe, synth_scene_clip
from codecaug.audio.wavio import write_wav
from codecaug.errors import ManifestError, RecipeError
from codecaug.features import FeatureParams, feature_divergence, log_mel


def test_synth_clip_deterministic():
    recipe = DEFAULT_RECIPES[CLASS_LIST[0]]
    a = synth_scene_clip(recipe, 1.0, 42)
    b = synth_scene_clip(recipe, 1.0, 42)
    assert a.sample_rate == b.sample_rate
    assert np.array_equal(a.samples, b.samples)
    c = synth_scene_clip(recipe, 1.0, 43)
    assert not np.array_equal(a.samples, c.samples)


def test_synth_clip_peak_bounded():
    for label in CLASS_LIST:
        clip = synth_scene_clip(DEFAULT_RECIPES[label], 0.5, 7)
        peak = np.abs(clip.samples).max()
        assert peak <= 10.0 ** (-1.0 / 20.0) + 1e-9, label


def test_single_tone_recipe_peaks_at_its_frequency():
    recipe = SceneRecipe(class_index=0, tones=[(1000.0, -6.0, 0.0)])
    clip = synth_scene_clip(recipe, 1.0, 3)
    spectrum = np.abs(np.fft.rfft(clip.samples))
    peak_hz = np.argmax(spectrum) * clip.sample_rate / clip.samples.size
    assert abs(peak_hz - 1000.0) < 2.0


def test_recipe_validation():
    with pytest.raises(RecipeError):
        synth_scene_clip(SceneRecipe(class_index=0, tones=[(30000.0, -6.0, 0.0)]), 0.2, 0)
    with pytest.raises(RecipeError):
        synth_scene_clip(SceneRecipe(class_index=0, noise_bands=[(500.0, 100.0, 3.0)]), 0.2, 0)
    with pytest.raises(RecipeError):
        synth_scene_clip(SceneRecipe(class_index=77), 0.2, 0)


def test_distinct_classes_have_distinct_features():
    a = synth_scene_clip(DEFAULT_RECIPES[CLASS_LIST[0]], 0.5, 7, 44100)
    b = synth_scene_clip(DEFAULT_RECIPES[CLASS_LIST[9]], 0.5, 7, 44100)
    params = FeatureParams()
    assert feature_divergence(log_mel(a, params), log_mel(b, params)) > 0.0


def test_build_synthetic_dataset_counts_and_balance(tmp_path):
    manifest = build_synthetic_dataset(2, 1, 0.5, 1, str(tmp_path / "ds"))
    assert len(manifest.items) == 30
    train = manifest.split_items("train")
    evals = manifest.split_items("eval")
    assert len(train) == 20 and len(evals) == 10
    for label in CLASS_LIST:
        assert sum(1 for i in train if i.scene_label == label) == 2
        assert sum(1 for i in evals if i.scene_label == label) == 1
    # splits never share a clip id
    assert not {i.clip_id for i in train} & {i.clip_id for i in evals}


def test_build_synthetic_dataset_byte_identical_rebuild(tmp_path):
    m1 = build_synthetic_dataset(1, 1, 0.3, 5, str(tmp_path / "a"))
    m2 = build_synthetic_dataset(1, 1, 0.3, 5, str(tmp_path / "b"))
    assert [i.clip_id for i in m1.items] == [i.clip_id for i in m2.items]
    for i1, i2 in zip(m1.items, m2.items):
        assert filecmp.cmp(i1.file_path, i2.file_path, shallow=False), i1.clip_id
    meta1 = (tmp_path / "a" / "meta.tsv").read_bytes()
    meta2 = (tmp_path / "b" / "meta.tsv").read_bytes()
    assert meta1 == meta2


def test_manifest_save_load_round_trip(tmp_path):
    manifest = build_synthetic_dataset(1, 1, 0.3, 9, str(tmp_path / "ds"))
    loaded = load_manifest(str(tmp_path / "ds" / "meta.tsv"))
    assert [i.clip_id for i in loaded.items] == [i.clip_id for i in manifest.items]
    assert [i.split for i in loaded.items] == [i.split for i in manifest.items]
    for item in loaded.items:
        assert os.path.isfile(item.file_path)


def test_dcase_manifest_mapping(tmp_path):
    from codecaug.audio.clip import AudioClip

    for name in ("a", "p", "b"):
        write_wav(str(tmp_path / f"{name}.wav"), AudioClip(44100, np.zeros(100)))
    meta = tmp_path / "meta.csv"
    meta.write_text(
        "filename\tscene_label\n"
        "a.wav\tairport\n"
        "p.wav\tpark\n"
        "b.wav\tbus\n"
    )
    manifest = load_dcase_manifest(str(meta), str(tmp_path))
    assert [i.scene_label for i in manifest.items] == ["airport", "park", "bus"]
    cats = [manifest.category_map[i.scene_label] for i in manifest.items]
    assert cats == ["indoor", "outdoor", "transportation"]
    assert all(i.split == "eval" for i in manifest.items)


def test_dcase_manifest_rejects_unknown_label(tmp_path):
    meta = tmp_path / "meta.csv"
    meta.write_text("filename\tscene_label\nx.wav\tbeach\n")
    with pytest.raises(ManifestError, match="beach"):
        load_dcase_manifest(str(meta), str(tmp_path))


def test_dcase_manifest_rejects_degenerate_files(tmp_path):
    meta = tmp_path / "meta.csv"
    meta.write_text("filename\tscene_label\n")
    with pytest.raises(ManifestError, match="no items"):
        load_dcase_manifest(str(meta), str(tmp_path))
    meta.write_text("scene_label\nairport\n")
    with pytest.raises(ManifestError, match="filename"):
        load_dcase_manifest(str(meta), str(tmp_path))
    meta.write_text("filename\tscene_label\nmissing.wav\tairport\n")
    with pytest.raises(ManifestError, match="missing"):
        load_dcase_manifest(str(meta), str(tmp_path))


def test_manifest_validate_catches_duplicates_and_bad_splits(tmp_path):
    item = ManifestItem("c1", "x.wav", "airport", "train")
    dup = DatasetManifest(items=[item, ManifestItem("c1", "y.wav", "park", "eval")])
    with pytest.raises(ManifestError, match="duplicate"):
        dup.validate()
    bad = DatasetManifest(items=[ManifestItem("c2", "x.wav", "airport", "test")])
    with pytest.raises(ManifestError, match="split"):
        bad.validate()


def test_category_map_covers_all_classes():
    assert set(DEFAULT_CATEGORY_MAP) == set(CLASS_LIST)
    assert set(DEFAULT_CATEGORY_MAP.values()) == set(CATEGORY_LIST)


def test_interclass_divergence_exceeds_intraclass():
    """Different scene classes sit further apart in feature space than
    re-seeded clips of one class; the classification task is learnable."""
    params = FeatureParams()
    feats = {
        label: [log_mel(synth_scene_clip(DEFAULT_RECIPES[label], 0.5, s), params)
                for s in (0, 1)]
        for label in CLASS_LIST
    }
    intra = np.mean([feature_divergence(f[0], f[1]) for f in feats.values()])
    inter = np.mean([
        feature_divergence(feats[a][0], feats[b][0])
        for ai, a in enumerate(CLASS_LIST) for b in CLASS_LIST[ai + 1:]
    ])
    assert inter > intra
