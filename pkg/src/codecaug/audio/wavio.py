"""WAV (RIFF) reader/writer.

Reads 16-bit PCM and 32-bit IEEE float WAV; multi-channel input is
mean-mixed down to mono. Writes 16-bit PCM mono. The stdlib wave module
is not used because it rejects float WAV and reports all failures with
one exception type; here malformed containers, unsupported codecs, and
I/O failures stay distinguishable.
"""

import os
import struct

import numpy as np

from ..errors import MalformedRiffError, UnsupportedWavError
from .clip import AudioClip

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


def read_wav(path) -> AudioClip:
    """Read a WAV file as a mono AudioClip with samples clipped to [-1, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()

    if len(data) < 12:
        raise MalformedRiffError(f"{path}: file too short for a RIFF header")
    if data[0:4] != b"RIFF":
        raise MalformedRiffError(f"{path}: missing RIFF magic")
    if data[8:12] != b"WAVE":
        raise MalformedRiffError(f"{path}: missing WAVE form type")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MalformedRiffError(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise MalformedRiffError(f"{path}: data chunk truncated")
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise MalformedRiffError(f"{path}: no fmt chunk")
    if payload is None:
        raise MalformedRiffError(f"{path}: no data chunk")

    format_tag, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if format_tag == WAVE_FORMAT_EXTENSIBLE:
        raise UnsupportedWavError(f"{path}: WAVE_FORMAT_EXTENSIBLE is not supported")
    if channels < 1:
        raise MalformedRiffError(f"{path}: channel count {channels}")

    if format_tag == WAVE_FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        x = raw.astype(np.float64) / 32767.0
    elif format_tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4")
        x = raw.astype(np.float64)
    else:
        raise UnsupportedWavError(
            f"{path}: unsupported codec (format tag {format_tag}, {bits}-bit)"
        )

    if channels > 1:
        usable = len(x) // channels * channels
        x = x[:usable].reshape(-1, channels).mean(axis=1)

    return AudioClip(sample_rate, np.clip(x, -1.0, 1.0))


def write_wav(path, clip: AudioClip):
    """Write a clip as 16-bit PCM mono WAV.

    Round-trips within one quantization step: |read(write(x)) - x| <= 2**-15
    for samples already inside [-1, 1].
    """
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"parent directory does not exist: {parent}")

    pcm = np.clip(np.round(clip.samples * 32767.0), -32768, 32767).astype("<i2")
    body = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(body),
        b"WAVE",
        b"fmt ",
        16,
        WAVE_FORMAT_PCM,
        1,
        clip.sample_rate,
        clip.sample_rate * 2,
        2,
        16,
        b"data",
        len(body),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)
