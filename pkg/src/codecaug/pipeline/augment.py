"""Training-set augmentation: codec transcodes and the baseline jitter set.

generate_augmented_set materializes every (train clip, codec) transcode
as a WAV next to a new manifest, mirroring the offline workflow the
experiments assume. select_codec_subset picks the k codec configurations
that maximize log-mel feature divergence, the criterion used to choose
augmentation codecs.
"""

import hashlib
import os
import zlib

import numpy as np

from ..audio.clip import AudioClip
from ..audio.manifest import DatasetManifest, ManifestItem, save_manifest
from ..audio.wavio import read_wav, write_wav
from ..codecs import transcode
from ..errors import CodecaugError, PipelineError
from ..features import FeatureParams, feature_divergence, log_mel

BASELINE_TAG = "baseline"
# baseline augmentation ranges: gain jitter, circular shift, noise floor
GAIN_JITTER_DB = 3.0
NOISE_SNR_DB = 30.0


def apply_baseline_augmentation(clip: AudioClip, seed: int) -> AudioClip:
    """Gain jitter of +-3 dB, circular time shift, and low-level noise
    (30 dB below the clip's RMS). Deterministic per seed."""
    rng = np.random.default_rng(seed)
    x = clip.samples
    gain = 10.0 ** (rng.uniform(-GAIN_JITTER_DB, GAIN_JITTER_DB) / 20.0)
    shift = int(rng.integers(0, max(len(x), 1)))
    rms = float(np.sqrt(np.mean(x**2))) if len(x) else 0.0
    noise = rng.standard_normal(len(x)) * rms * 10.0 ** (-NOISE_SNR_DB / 20.0)
    out = np.roll(x, shift) * gain + noise
    return AudioClip(clip.sample_rate, np.clip(out, -1.0, 1.0))


def _item_seed(clip_id: str, base_seed: int) -> int:
    # crc32 is stable across runs and platforms, unlike hash()
    return (zlib.crc32(clip_id.encode("utf-8")) ^ (base_seed * 0x9E3779B1)) & 0x7FFFFFFF


def spec_file_tag(spec) -> str:
    """Filesystem-safe, collision-free tag for a spec string or clip id."""
    text = str(spec)
    safe = "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in text)
    return f"{safe}-{hashlib.sha1(text.encode()).hexdigest()[:6]}"


def generate_augmented_set(
    manifest: DatasetManifest,
    codecs,
    out_dir,
    include_baseline=False,
    baseline_seed=0,
    progress=None,
) -> DatasetManifest:
    """Write transcoded copies of every train item and return the grown manifest.

    The result keeps all original items (train and eval untouched, same
    ids and files) and adds one item per (train clip, codec) with
    codec_tag set to the spec string; with include_baseline, every
    train item (originals and the fresh transcodes alike) gains one
    jittered copy, so coded material is seen under the same gain,
    shift, and noise perturbations as clean material. Item count is
    train*(1+len(codecs)) + eval without the baseline block and twice
    the train part with it. Any failure aborts the whole run and
    removes files already written.
    """
    for spec in codecs:
        spec.validate()
    train_items = manifest.split_items("train")
    if not train_items:
        raise PipelineError("manifest has no train items to augment")

    audio_dir = os.path.join(out_dir, "audio")
    os.makedirs(audio_dir, exist_ok=True)
    written = []
    items = list(train_items)

    def render(clip, clip_id, label, tag, filename):
        path = os.path.join(audio_dir, filename)
        write_wav(path, clip)
        written.append(path)
        items.append(ManifestItem(clip_id, path, label, "train", tag))

    try:
        for spec in codecs:
            tag = spec_file_tag(spec)
            for item in train_items:
                try:
                    coded = transcode(spec, read_wav(item.file_path))
                except CodecaugError as exc:
                    raise PipelineError(f"{item.clip_id} x {spec}: {exc}") from exc
                render(coded, f"{item.clip_id}__{spec}", item.scene_label,
                       str(spec), f"{item.clip_id}__{tag}.wav")
            if progress is not None:
                progress(f"augmented {len(train_items)} clips with {spec}")
        if include_baseline:
            for item in list(items):
                clip = read_wav(item.file_path)
                jittered = apply_baseline_augmentation(clip, _item_seed(item.clip_id, baseline_seed))
                if item.codec_tag == "none":
                    tag, stem = BASELINE_TAG, item.clip_id
                else:
                    # coded copies get independent jitter under a compound tag
                    tag, stem = f"{item.codec_tag}+{BASELINE_TAG}", spec_file_tag(item.clip_id)
                render(jittered, f"{item.clip_id}__{BASELINE_TAG}", item.scene_label,
                       tag, f"{stem}__{BASELINE_TAG}.wav")
            if progress is not None:
                progress(f"baseline-augmented {len(items)} clips")
    except Exception:
        for path in written:
            if os.path.isfile(path):
                os.remove(path)
        raise

    items.extend(manifest.split_items("eval"))
    grown = DatasetManifest(
        items=items,
        class_list=list(manifest.class_list),
        category_map=dict(manifest.category_map),
    )
    grown.validate()
    if grown.split_items("eval") != manifest.split_items("eval"):
        raise PipelineError("augmentation must leave the eval split untouched")
    save_manifest(grown, os.path.join(out_dir, "meta.tsv"))
    return grown


def select_codec_subset(manifest_sample, candidates, k, feature_params: FeatureParams = None):
    """Greedy feature-divergence codec selection.

    First pick: the candidate whose transcodes diverge most (mean over
    the sample clips) from the originals' log-mel features. Later picks:
    the candidate maximizing the minimum feature distance to the already
    picked transcodes. Ties resolve to the lowest candidate index, so
    the selection is deterministic.
    """
    items = manifest_sample.items if hasattr(manifest_sample, "items") else list(manifest_sample)
    if not items:
        raise PipelineError("sample is empty")
    if not 1 <= k <= len(candidates):
        raise PipelineError(f"k must be in [1, {len(candidates)}], got {k}")
    params = feature_params or FeatureParams()

    originals = []
    coded = []  # coded[c][i] = features of candidate c on clip i
    for item in items:
        originals.append(log_mel(read_wav(item.file_path), params))
    for spec in candidates:
        row = []
        for item, orig in zip(items, originals):
            try:
                row.append(log_mel(transcode(spec, read_wav(item.file_path)), params))
            except CodecaugError as exc:
                raise PipelineError(f"{spec} failed on {item.clip_id}: {exc}") from exc
        coded.append(row)

    n = len(candidates)
    score = [
        float(np.mean([feature_divergence(o, f) for o, f in zip(originals, row)]))
        for row in coded
    ]
    dist = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            d = float(np.mean([feature_divergence(x, y) for x, y in zip(coded[a], coded[b])]))
            dist[a, b] = dist[b, a] = d

    picked = [int(np.argmax(score))]  # argmax takes the first (lowest-index) max
    while len(picked) < k:
        best, best_gap = None, -1.0
        for c in range(n):
            if c in picked:
                continue
            gap = float(min(dist[c, p] for p in picked))
            if gap > best_gap:
                best, best_gap = c, gap
        picked.append(best)
    return [candidates[c] for c in picked]
