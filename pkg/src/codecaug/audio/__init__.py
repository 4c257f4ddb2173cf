from .clip import AudioClip
from .labels import CATEGORY_LIST, CLASS_LIST, DEFAULT_CATEGORY_MAP
from .manifest import (
    DatasetManifest,
    ManifestItem,
    build_synthetic_dataset,
    load_dcase_manifest,
    load_manifest,
    save_manifest,
)
from .synth import DEFAULT_RECIPES, SceneRecipe, synth_scene_clip
from .wavio import read_wav, write_wav

__all__ = [
    "AudioClip",
    "CATEGORY_LIST",
    "CLASS_LIST",
    "DEFAULT_CATEGORY_MAP",
    "DatasetManifest",
    "ManifestItem",
    "build_synthetic_dataset",
    "load_dcase_manifest",
    "load_manifest",
    "save_manifest",
    "DEFAULT_RECIPES",
    "SceneRecipe",
    "synth_scene_clip",
    "read_wav",
    "write_wav",
]
