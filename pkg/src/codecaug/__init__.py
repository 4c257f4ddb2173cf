"""codecaug: how lossy perceptual audio coding affects acoustic scene
classification, and how codec-based training augmentation restores it.

Subpackages: audio (clips, WAV I/O, synthetic scenes, manifests),
codecs (SBC and MDCT-based perceptual codec families plus an external
adapter), features (log-mel), quality (NMR/ODG proxy), classifier
(small CNN ensemble), pipeline (augmentation and experiment runners).
"""

from .audio.clip import AudioClip
from .audio.manifest import DatasetManifest, ManifestItem, build_synthetic_dataset, load_manifest
from .audio.wavio import read_wav, write_wav
from .codecs import CodecSpec, EncodedStream, decode, encode, parse_codec_spec, transcode
from .errors import CodecaugError
from .features import FeatureParams, LogMel, feature_divergence, log_mel
from .quality import QualityScore, linear_fit, nmr, odg_proxy

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "CodecSpec",
    "CodecaugError",
    "DatasetManifest",
    "EncodedStream",
    "FeatureParams",
    "LogMel",
    "ManifestItem",
    "QualityScore",
    "build_synthetic_dataset",
    "decode",
    "encode",
    "feature_divergence",
    "linear_fit",
    "load_manifest",
    "log_mel",
    "nmr",
    "odg_proxy",
    "parse_codec_spec",
    "read_wav",
    "transcode",
    "write_wav",
    "__version__",
]
