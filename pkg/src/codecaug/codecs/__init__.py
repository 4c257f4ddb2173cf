"""Uniform encode/decode/transcode interface over the codec families."""

from ..audio.clip import AudioClip
from ..errors import DecodeError, EncodeError
from .external import transcode_external
from .ptc import (
    RateControlResult,
    decode_ptc,
    encode_ptc,
    estimate_frame_bits,
    ptc_config_for,
    ptc_rate_control,
)
from .sbc import (
    decode_sbc,
    derive_bitpool,
    encode_sbc,
    sbc_bit_allocation,
    sbc_config_for,
)
from .spec import FAMILIES, PTC_FAMILIES, CodecSpec, parse_codec_spec
from .stream import EncodedStream

# the paper's built-in codec/bitrate grid (the Opus rows need a real
# encoder and run through the external adapter instead)
TABLE1_GRID = (
    "ptc-aac@32", "ptc-aac@48", "ptc-aac@64",
    "ptc-heaac@16", "ptc-heaac@32",
    "ptc-mp3@32", "ptc-mp3@64",
    "sbc@64",
)

FAMILY_GRIDS = {
    "ptc-aac": (16.0, 32.0, 48.0, 64.0, 128.0),
    "ptc-heaac": (16.0, 32.0, 64.0),
    "ptc-mp3": (16.0, 32.0, 64.0, 128.0),
    "sbc": (48.0, 64.0, 128.0, 256.0),
}


def encode(spec: CodecSpec, clip: AudioClip) -> EncodedStream:
    spec.validate()
    if spec.family == "sbc":
        return encode_sbc(spec, clip)
    if spec.family in PTC_FAMILIES:
        return encode_ptc(spec, clip)
    raise EncodeError(
        f"family {spec.family} has no built-in encoder; use transcode")


def decode(stream: EncodedStream) -> AudioClip:
    family = stream.spec.family
    if family == "sbc":
        return decode_sbc(stream)
    if family in PTC_FAMILIES:
        return decode_ptc(stream)
    raise DecodeError(f"family {family} has no built-in decoder")


def transcode(spec: CodecSpec, clip: AudioClip) -> AudioClip:
    """encode followed by decode; the degradation operator."""
    spec.validate()
    if spec.family == "external":
        return transcode_external(spec, clip)
    return decode(encode(spec, clip))


__all__ = [
    "AudioClip", "CodecSpec", "EncodedStream", "RateControlResult",
    "FAMILIES", "FAMILY_GRIDS", "PTC_FAMILIES", "TABLE1_GRID",
    "decode", "decode_ptc", "decode_sbc", "derive_bitpool", "encode",
    "encode_ptc", "encode_sbc", "estimate_frame_bits", "parse_codec_spec",
    "ptc_config_for", "ptc_rate_control", "sbc_bit_allocation",
    "sbc_config_for", "transcode", "transcode_external",
]
