"""Adapter for running a real encoder binary over intermediate WAV files.

The command template carries {in} {out} {bitrate} placeholders and is
expected to produce a decoded WAV at {out}; it can be set per spec
(params key "cmd") or through the ASC_EXTERNAL_ENCODER environment
variable. Output is realigned to the input by cross-correlation, since
real coders add codec delay.
"""

import os
import shlex
import subprocess
import tempfile

import numpy as np

from ..audio.clip import AudioClip
from ..audio.wavio import read_wav, write_wav
from ..errors import ExternalEncoderError
from .spec import CodecSpec

ENV_VAR = "ASC_EXTERNAL_ENCODER"
MAX_LAG = 8192
PROCESS_TIMEOUT_S = 600.0


def resolve_template(spec: CodecSpec) -> str:
    template = spec.params.get("cmd") or os.environ.get(ENV_VAR)
    if not template:
        raise ExternalEncoderError(
            f"no external encoder configured (set {ENV_VAR} or the cmd param)")
    return str(template)


def _align(reference: np.ndarray, decoded: np.ndarray) -> np.ndarray:
    """Shift decoded by the lag maximizing cross-correlation with the
    reference, then pad/trim to the reference length."""
    n = int(2 ** np.ceil(np.log2(reference.size + decoded.size)))
    spec_r = np.fft.rfft(reference, n)
    spec_d = np.fft.rfft(decoded, n)
    corr = np.fft.irfft(spec_r * np.conj(spec_d), n)
    # correlation at shift s (decoded delayed by s) sits at index s mod n
    lags = np.concatenate([np.arange(0, MAX_LAG + 1),
                           np.arange(-MAX_LAG, 0)])
    values = corr[lags % n]
    lag = int(lags[np.argmax(values)])
    out = np.zeros(reference.size)
    if lag >= 0:
        take = decoded[lag:lag + reference.size]
        out[:take.size] = take
    else:
        take = decoded[:reference.size + lag]
        out[-lag:-lag + take.size] = take
    return out


def transcode_external(spec: CodecSpec, clip: AudioClip,
                       template: str = None) -> AudioClip:
    template = template or resolve_template(spec)
    with tempfile.TemporaryDirectory(prefix="codecaug-ext-") as tmp:
        in_path = os.path.join(tmp, "in.wav")
        out_path = os.path.join(tmp, "out.wav")
        write_wav(in_path, clip)
        command = template.format(**{"in": in_path, "out": out_path,
                                     "bitrate": f"{spec.bitrate_kbps:g}"})
        argv = shlex.split(command)
        try:
            proc = subprocess.run(argv, capture_output=True,
                                  timeout=PROCESS_TIMEOUT_S)
        except FileNotFoundError:
            raise ExternalEncoderError(
                f"external encoder binary not found: {argv[0]!r}") from None
        except subprocess.TimeoutExpired:
            raise ExternalEncoderError(
                f"external encoder timed out after {PROCESS_TIMEOUT_S:g}s") from None
        if proc.returncode != 0:
            tail = proc.stderr.decode("utf-8", "replace")[-500:]
            raise ExternalEncoderError(
                f"external encoder exited {proc.returncode}: {tail}")
        if not os.path.exists(out_path):
            raise ExternalEncoderError(
                "external encoder produced no output file")
        decoded = read_wav(out_path)
    if decoded.sample_rate != clip.sample_rate:
        raise ExternalEncoderError(
            f"external encoder changed sample rate "
            f"{clip.sample_rate} -> {decoded.sample_rate}")
    aligned = _align(clip.samples, decoded.samples)
    return AudioClip(sample_rate=clip.sample_rate,
                     samples=np.clip(aligned, -1.0, 1.0))
