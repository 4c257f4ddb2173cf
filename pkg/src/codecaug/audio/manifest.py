"""Dataset manifests: synthetic dataset construction and DCASE-style loading.

Manifest files are UTF-8 tab-separated with a header row. The minimal
DCASE-compatible form has columns "filename" and "scene_label"; the
extended form adds "split" (train|eval) and "codec_tag" (provenance:
"none", "baseline", or a codec spec string).
"""

import os
from dataclasses import dataclass, field

from ..errors import ManifestError
from .labels import CATEGORY_LIST, CLASS_LIST, DEFAULT_CATEGORY_MAP
from .synth import DEFAULT_RECIPES, synth_scene_clip
from .wavio import write_wav

SPLITS = ("train", "eval")


@dataclass
class ManifestItem:
    clip_id: str
    file_path: str
    scene_label: str
    split: str
    codec_tag: str = "none"


@dataclass
class DatasetManifest:
    items: list = field(default_factory=list)
    class_list: list = field(default_factory=lambda: list(CLASS_LIST))
    category_map: dict = field(default_factory=lambda: dict(DEFAULT_CATEGORY_MAP))

    def validate(self):
        seen = set()
        for item in self.items:
            if item.clip_id in seen:
                raise ManifestError(f"duplicate clip_id {item.clip_id!r}")
            seen.add(item.clip_id)
            if item.scene_label not in self.class_list:
                raise ManifestError(f"unknown scene_label {item.scene_label!r} ({item.clip_id})")
            if item.split not in SPLITS:
                raise ManifestError(f"unknown split {item.split!r} ({item.clip_id})")
        for label in self.class_list:
            category = self.category_map.get(label)
            if category not in CATEGORY_LIST:
                raise ManifestError(f"class {label!r} has no valid category (got {category!r})")

    def split_items(self, split):
        return [i for i in self.items if i.split == split]

    def class_index(self, label):
        return self.class_list.index(label)

    def category_index(self, label):
        return CATEGORY_LIST.index(self.category_map[label])


def save_manifest(manifest: DatasetManifest, path):
    # filenames are stored relative to the manifest so datasets stay relocatable
    root = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("filename\tscene_label\tsplit\tcodec_tag\n")
        for item in manifest.items:
            rel = os.path.relpath(os.path.abspath(item.file_path), root).replace(os.sep, "/")
            fh.write(f"{rel}\t{item.scene_label}\t{item.split}\t{item.codec_tag}\n")


def load_manifest(path, audio_root=None):
    """Load an extended (or minimal) manifest written by this toolkit."""
    return load_dcase_manifest(path, audio_root or os.path.dirname(os.path.abspath(path)))


def load_dcase_manifest(meta_path, audio_root, default_split="eval") -> DatasetManifest:
    """Load a DCASE-style meta file (tab-separated, header row).

    Requires "filename" and "scene_label" columns; honors optional "split"
    and "codec_tag" columns. Every referenced file must exist under
    audio_root, and labels must come from the 10-class list.
    """
    with open(meta_path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines:
        raise ManifestError(f"{meta_path}: empty file (no header)")

    header = lines[0].split("\t")
    for required in ("filename", "scene_label"):
        if required not in header:
            raise ManifestError(f"{meta_path}: missing column {required!r}")
    col = {name: idx for idx, name in enumerate(header)}

    items = []
    for row_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) < len(header):
            raise ManifestError(f"{meta_path}:{row_no}: expected {len(header)} columns")
        filename = fields[col["filename"]]
        label = fields[col["scene_label"]]
        if label not in CLASS_LIST:
            raise ManifestError(f"{meta_path}:{row_no}: unknown scene_label {label!r}")
        split = fields[col["split"]] if "split" in col else default_split
        codec_tag = fields[col["codec_tag"]] if "codec_tag" in col else "none"
        file_path = os.path.join(audio_root, filename)
        if not os.path.isfile(file_path):
            raise ManifestError(f"{meta_path}:{row_no}: referenced file missing: {file_path}")
        clip_id = os.path.splitext(filename.replace("\\", "/").split("/")[-1])[0]
        items.append(ManifestItem(clip_id, file_path, label, split, codec_tag))

    if not items:
        raise ManifestError(f"{meta_path}: no items after header")

    manifest = DatasetManifest(items=items)
    manifest.validate()
    return manifest


def build_synthetic_dataset(
    n_train_per_class,
    n_eval_per_class,
    duration,
    seed,
    out_dir,
    sample_rate=44100,
    recipes=None,
) -> DatasetManifest:
    """Render a balanced 10-class dataset to out_dir and write its manifest.

    Train and eval clips draw from disjoint seed streams, so the splits can
    never share a realization. Rebuilding with the same arguments produces
    byte-identical files and manifest.
    """
    if n_train_per_class <= 0 or n_eval_per_class <= 0:
        raise ValueError("per-class counts must be positive")
    recipes = recipes or DEFAULT_RECIPES

    audio_dir = os.path.join(out_dir, "audio")
    os.makedirs(audio_dir, exist_ok=True)

    items = []
    for label in CLASS_LIST:
        recipe = recipes[label]
        for split, count, split_code in (("train", n_train_per_class, 0), ("eval", n_eval_per_class, 1)):
            for idx in range(count):
                # split_code keeps train/eval seed streams disjoint
                clip_seed = (seed * 1_000_003 + split_code * 500_000 + idx) & 0xFFFFFFFF
                clip = synth_scene_clip(recipe, duration, clip_seed, sample_rate)
                clip_id = f"{label}-{split}-{idx:04d}"
                rel_path = os.path.join("audio", clip_id + ".wav")
                write_wav(os.path.join(out_dir, rel_path), clip)
                items.append(ManifestItem(clip_id, os.path.join(out_dir, rel_path), label, split))

    manifest = DatasetManifest(items=items)
    manifest.validate()
    save_manifest(manifest, os.path.join(out_dir, "meta.tsv"))
    return manifest
