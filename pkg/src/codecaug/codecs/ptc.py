"""Perceptual transform codec family (MDCT + masking-driven quantization).

Emulates the artifact classes of the common lossy coders rather than
their bitstreams: band limiting with family-specific cutoffs, block
quantization noise shaped by a masking model, spectral holes from bands
whose quantizers collapse to zero at low rates, and for the heaac
variant a coarse copy-and-scale reconstruction of the highband from
transmitted band energies. Constant frame size gives CBR accounting.

Container: "PTC1" magic, little-endian header, then frame_count frames
of frame_bytes each. Frames carry per-band coded flags, an 8-bit log
step index, a 4-bit sample width, and two's-complement bin values.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from ..audio.clip import AudioClip
from ..errors import (
    CodecSpecError,
    DecodeError,
    EncodeError,
    TruncatedStreamError,
)
from . import psycho
from .bitio import BitWriter
from .spec import CodecSpec
from .stream import EncodedStream

MAGIC = b"PTC1"
VERSION = 1
FAMILY_IDS = {"ptc-mp3": 1, "ptc-aac": 2, "ptc-heaac": 3}
FAMILY_FROM_ID = {v: k for k, v in FAMILY_IDS.items()}

HEADER = struct.Struct("<4sBBHIIIIIH")  # magic, family, version, window,
# bitrate_bps, cutoff_hz, frame_count, original_length, sample_rate, frame_bytes
SBR_BANDS = 3
SBR_EPS = 1e-12

# 8-bit log2 step-size code: delta = 2 ** ((idx - 128) / 4)
STEP_BIAS = 128
STEP_SCALE = 4.0

LAMBDA_EXP_LO = -12.0
LAMBDA_EXP_HI = 24.0


def _cutoff_hz(family: str, bitrate_kbps: float, sample_rate: int) -> float:
    nyquist = sample_rate / 2.0
    if family == "ptc-mp3":
        return min(0.9 * nyquist, 170.0 * bitrate_kbps)
    if family == "ptc-aac":
        return min(0.9 * nyquist, 260.0 * bitrate_kbps)
    return min(0.45 * nyquist, 2000.0 + 150.0 * bitrate_kbps)


@dataclass(frozen=True)
class PtcConfig:
    family: str
    sample_rate: int
    window: int
    cutoff_hz: float
    frame_bytes: int

    @property
    def n_bins(self) -> int:
        return self.window // 2

    @property
    def cut_bin(self) -> int:
        # first zeroed bin, pulled 2 bins under the nominal cutoff so the
        # windowed-atom leakage above it stays below -40 dB
        nyquist = self.sample_rate / 2.0
        kept = math.ceil(self.cutoff_hz / nyquist * self.n_bins - 0.5) - 2
        return int(min(max(kept, 1), self.n_bins))

    @property
    def has_sbr(self) -> bool:
        return self.family == "ptc-heaac"

    @property
    def reserve_bytes(self) -> int:
        return SBR_BANDS if self.has_sbr else 0

    def sbr_edges(self) -> np.ndarray:
        """Bin edges of the copied highband, (SBR_BANDS + 1,)."""
        nyquist = self.sample_rate / 2.0
        top_hz = min(0.9 * nyquist, 2.5 * self.cutoff_hz)
        lo = self.cut_bin
        hi = int(min(max(round(top_hz / nyquist * self.n_bins), lo + SBR_BANDS),
                     self.n_bins))
        ratio = (hi / lo) ** (1.0 / SBR_BANDS)
        edges = np.round(lo * ratio ** np.arange(SBR_BANDS + 1)).astype(np.int64)
        edges[0] = lo
        edges[-1] = hi
        for i in range(1, SBR_BANDS + 1):
            edges[i] = max(edges[i], edges[i - 1] + 1)
        return np.minimum(edges, self.n_bins)


def ptc_config_for(spec: CodecSpec, sample_rate: int) -> PtcConfig:
    if sample_rate < 8000:
        raise EncodeError(f"sample rate {sample_rate} too low for PTC")
    window = spec.params.get("window", 1024)
    nyquist = sample_rate / 2.0
    cutoff = spec.params.get("cutoff")
    if cutoff is None:
        cutoff = _cutoff_hz(spec.family, spec.bitrate_kbps, sample_rate)
    else:
        cutoff = float(cutoff)
        if cutoff > nyquist:
            raise CodecSpecError(
                f"cutoff {cutoff:g} Hz above Nyquist {nyquist:g} Hz")
        if spec.family == "ptc-heaac" and cutoff > 0.5 * nyquist:
            raise CodecSpecError(
                "heaac cutoff must leave room for the copied highband")
    n_bins = window // 2
    frame_bytes = max(8, round(spec.bitrate_kbps * 1000.0 * n_bins
                               / sample_rate / 8.0))
    return PtcConfig(family=spec.family, sample_rate=sample_rate,
                     window=window, cutoff_hz=float(cutoff),
                     frame_bytes=frame_bytes)


# ---------------------------------------------------------------------------
# MDCT

_MDCT_CACHE = {}


def _mdct_tables(n_bins):
    entry = _MDCT_CACHE.get(n_bins)
    if entry is None:
        N = n_bins
        n = np.arange(2 * N)
        k = np.arange(N)
        basis = np.cos(np.pi / N * (n[None, :] + 0.5 + N / 2.0)
                       * (k[:, None] + 0.5))
        window = np.sin(np.pi / (2.0 * N) * (n + 0.5))
        entry = (basis, window)
        _MDCT_CACHE[n_bins] = entry
    return entry


def mdct_analyze(samples: np.ndarray, n_bins: int) -> np.ndarray:
    """Windowed MDCT frames with hop n_bins; one leading half-frame of
    padding so overlap-add covers every input sample."""
    N = n_bins
    basis, window = _mdct_tables(N)
    x = np.asarray(samples, dtype=np.float64)
    nframes = -(-x.size // N) + 1
    pad = np.zeros((nframes + 1) * N)
    pad[N:N + x.size] = x
    frames = np.lib.stride_tricks.sliding_window_view(pad, 2 * N)[::N][:nframes]
    return (frames * window[None, :]) @ basis.T


def mdct_synthesize(coeffs: np.ndarray, length: int) -> np.ndarray:
    nframes, N = coeffs.shape
    basis, window = _mdct_tables(N)
    if length > nframes * N:
        raise DecodeError(f"cannot synthesize {length} samples "
                          f"from {nframes} frames")
    frames = (coeffs @ basis) * window[None, :] * (2.0 / N)
    acc = np.zeros((nframes + 1, N))
    acc[:-1] += frames[:, :N]
    acc[1:] += frames[:, N:]
    return acc.reshape(-1)[N:N + length]


# ---------------------------------------------------------------------------
# rate control

@dataclass(frozen=True)
class RateControlResult:
    scale: float
    estimated_bits: float
    rate_missed: bool


def _quantized_step(delta):
    idx = np.clip(np.round(STEP_BIAS + STEP_SCALE * np.log2(delta)), 0, 255)
    return idx.astype(np.int64), np.exp2((idx - STEP_BIAS) / STEP_SCALE)


def estimate_frame_bits(band_energies, thresholds, scale, band_sizes) -> float:
    """Analytic coded-size estimate at quantizer scale `scale`.

    Per band the code size is size * log2-range of the quantizer, where
    the range is predicted from the band RMS with a fixed crest factor,
    plus 12 header bits per coded band and one flag bit per band.
    """
    energies = np.asarray(band_energies, dtype=np.float64)
    thr = np.asarray(thresholds, dtype=np.float64)
    sizes = np.asarray(band_sizes, dtype=np.float64)
    base = np.sqrt(12.0 * thr / sizes)
    _, delta = _quantized_step(scale * base)
    amplitude = 3.0 * np.sqrt(energies / sizes)
    max_q = np.floor(amplitude / delta + 0.5)
    widths = np.zeros_like(max_q)
    pos = max_q >= 1.0
    widths[pos] = np.clip(np.floor(np.log2(max_q[pos])) + 2.0, 2.0, 15.0)
    coded = widths > 0
    return float(energies.shape[-1] + np.sum(coded * (12.0 + sizes * widths)))


def ptc_rate_control(band_energies, masking_thresholds, target_bits,
                     band_sizes=None) -> RateControlResult:
    """Bisect the global quantizer scale so the analytic bit estimate
    lands within 5% of target_bits; at a search bound the miss is
    flagged instead."""
    energies = np.asarray(band_energies, dtype=np.float64)
    thr = np.asarray(masking_thresholds, dtype=np.float64)
    if band_sizes is None:
        band_sizes = np.ones(energies.shape[-1])
    if not np.all(np.isfinite(energies)) or not np.all(np.isfinite(thr)):
        raise EncodeError("non-finite band energies or thresholds")
    if np.any(thr <= 0):
        raise EncodeError("masking thresholds must be positive")
    if not target_bits > 0:
        raise EncodeError(f"target_bits must be positive, got {target_bits}")

    lo, hi = LAMBDA_EXP_LO, LAMBDA_EXP_HI
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        bits = estimate_frame_bits(energies, thr, 2.0 ** mid, band_sizes)
        if bits > target_bits:
            lo = mid
        else:
            hi = mid
        if 0.95 * target_bits <= bits <= 1.05 * target_bits:
            return RateControlResult(2.0 ** mid, bits, False)
    for exp in (hi, lo):
        bits = estimate_frame_bits(energies, thr, 2.0 ** exp, band_sizes)
        if 0.95 * target_bits <= bits <= 1.05 * target_bits:
            return RateControlResult(2.0 ** exp, bits, False)
    bits = estimate_frame_bits(energies, thr, 2.0 ** hi, band_sizes)
    return RateControlResult(2.0 ** hi, bits, True)


# ---------------------------------------------------------------------------
# encode

def encode_ptc(spec: CodecSpec, clip: AudioClip) -> EncodedStream:
    config = ptc_config_for(spec, clip.sample_rate)
    N = config.n_bins
    coeffs = mdct_analyze(clip.samples, N)
    nframes = coeffs.shape[0]

    sbr_bytes = None
    if config.has_sbr:
        sbr_bytes = _encode_sbr(coeffs, config)
    cut = config.cut_bin
    coeffs[:, cut:] = 0.0

    layout = psycho.band_layout(N, config.sample_rate)
    energies = psycho.band_energies(coeffs ** 2, layout)
    thresholds = psycho.masking_thresholds(energies, layout)
    sizes = layout.sizes

    base = np.sqrt(12.0 * thresholds / sizes[None, :])  # (T, bands)
    peak = np.maximum.reduceat(np.abs(coeffs), layout.edges[:-1], axis=1)
    budget = (config.frame_bytes - config.reserve_bytes) * 8

    def frame_bits(scale_exp):
        _, delta = _quantized_step(np.exp2(scale_exp)[:, None] * base)
        max_q = np.floor(peak / delta + 0.5)
        widths = np.where(
            max_q >= 1.0,
            np.clip(np.floor(np.log2(np.maximum(max_q, 1.0))) + 2, 2, 15),
            0.0)
        return layout.n_bands + np.sum(
            (widths > 0) * (12.0 + sizes[None, :] * widths), axis=1), widths

    lo = np.full(nframes, LAMBDA_EXP_LO)
    hi = np.full(nframes, LAMBDA_EXP_HI)
    for _ in range(44):
        mid = 0.5 * (lo + hi)
        bits, _ = frame_bits(mid)
        over = bits > budget
        lo = np.where(over, mid, lo)
        hi = np.where(over, hi, mid)

    step_idx, delta = _quantized_step(np.exp2(hi)[:, None] * base)
    q = np.round(coeffs / np.repeat(delta, sizes, axis=1))
    q = np.clip(q, -16383, 16383).astype(np.int64)
    max_q = np.maximum.reduceat(np.abs(q), layout.edges[:-1], axis=1)
    widths = np.where(
        max_q >= 1,
        np.clip(np.floor(np.log2(np.maximum(max_q, 1))).astype(np.int64) + 2,
                2, 15),
        0).astype(np.int64)

    payload = _pack_frames(q, widths, step_idx, sbr_bytes, config, layout)
    header = HEADER.pack(MAGIC, FAMILY_IDS[config.family], VERSION,
                         config.window, int(spec.bitrate_kbps * 1000),
                         int(round(config.cutoff_hz)), nframes,
                         clip.samples.size, config.sample_rate,
                         config.frame_bytes)
    return EncodedStream(spec=spec, frame_count=nframes,
                         payload=header + payload,
                         original_length=clip.samples.size)


def _encode_sbr(coeffs, config: PtcConfig) -> np.ndarray:
    edges = config.sbr_edges()
    out = np.zeros((coeffs.shape[0], SBR_BANDS), dtype=np.uint8)
    for i in range(SBR_BANDS):
        band = coeffs[:, edges[i]:edges[i + 1]]
        energy = np.sum(band ** 2, axis=1)
        db = 10.0 * np.log10(energy + SBR_EPS)
        idx = np.where(energy < 1e-10, 0,
                       np.clip(np.round((db + 68.0) * 2.0), 1, 255))
        out[:, i] = idx.astype(np.uint8)
    return out


def _pack_frames(q, widths, step_idx, sbr_bytes, config: PtcConfig, layout):
    nframes, n_bands = widths.shape
    edges = layout.edges
    reserve = config.reserve_bytes
    body_bytes = config.frame_bytes - reserve
    chunks = []
    for t in range(nframes):
        writer = BitWriter()
        coded = widths[t] > 0
        flags = 0
        for b in range(n_bands):
            flags = (flags << 1) | int(coded[b])
        writer.write(flags, n_bands)
        for b in np.nonzero(coded)[0]:
            a = int(widths[t, b])
            writer.write((int(step_idx[t, b]) << 4) | a, 12)
            mask = (1 << a) - 1
            vals = (q[t, edges[b]:edges[b + 1]] & mask).tolist()
            for v in vals:
                writer.write(v, a)
        if sbr_bytes is not None:
            chunks.append(sbr_bytes[t].tobytes())
        chunks.append(writer.to_bytes(body_bytes))
    return b"".join(chunks)


# ---------------------------------------------------------------------------
# decode

def decode_ptc(stream: EncodedStream) -> AudioClip:
    payload = bytes(stream.payload)
    if len(payload) < HEADER.size:
        raise TruncatedStreamError("payload shorter than PTC1 header",
                                   frame_index=0)
    (magic, family_id, version, window, bitrate_bps, cutoff_hz, nframes,
     original_length, sample_rate, frame_bytes) = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise DecodeError(f"bad container magic {magic!r}")
    if family_id not in FAMILY_FROM_ID:
        raise DecodeError(f"unknown PTC family id {family_id}")
    if version != VERSION:
        raise DecodeError(f"unsupported PTC version {version}")
    if not (256 <= window <= 8192 and window & (window - 1) == 0):
        raise DecodeError(f"bad window length {window}")
    if not 8000 <= sample_rate <= 192000:
        raise DecodeError(f"implausible sample rate {sample_rate}")
    if frame_bytes < 1:
        raise DecodeError(f"bad frame size {frame_bytes}")
    body = len(payload) - HEADER.size
    if body != nframes * frame_bytes:
        raise TruncatedStreamError(
            f"container holds {body} payload bytes, "
            f"expected {nframes} x {frame_bytes}",
            frame_index=min(body // frame_bytes, nframes))
    N = window // 2
    if original_length > max(nframes - 1, 0) * N:
        raise DecodeError(
            f"original length {original_length} exceeds frame coverage")
    nyquist = sample_rate / 2.0
    if cutoff_hz > nyquist:
        raise DecodeError(f"cutoff {cutoff_hz} above Nyquist")

    config = PtcConfig(family=FAMILY_FROM_ID[family_id],
                       sample_rate=sample_rate, window=window,
                       cutoff_hz=float(cutoff_hz), frame_bytes=frame_bytes)
    layout = psycho.band_layout(N, sample_rate)
    edges = layout.edges
    n_bands = layout.n_bands
    reserve = config.reserve_bytes
    if frame_bytes * 8 < reserve * 8 + n_bands:
        raise DecodeError(f"frame size {frame_bytes} too small for band flags")

    frames = np.frombuffer(payload, dtype=np.uint8,
                           offset=HEADER.size).reshape(nframes, frame_bytes)
    coeffs = np.zeros((nframes, N))
    pow2 = [1 << np.arange(w - 1, -1, -1) for w in range(16)]
    for t in range(nframes):
        bits = np.unpackbits(frames[t, reserve:])
        flags = bits[:n_bands]
        cursor = n_bands
        for b in np.nonzero(flags)[0]:
            if cursor + 12 > bits.size:
                raise TruncatedStreamError("band header past frame end",
                                           frame_index=t)
            idx = int(bits[cursor:cursor + 8] @ pow2[8])
            a = int(bits[cursor + 8:cursor + 12] @ pow2[4])
            cursor += 12
            if not 2 <= a <= 15:
                raise DecodeError(f"corrupt sample width {a} in band {b}",
                                  frame_index=t)
            size = int(edges[b + 1] - edges[b])
            if cursor + size * a > bits.size:
                raise TruncatedStreamError("band samples past frame end",
                                           frame_index=t)
            block = bits[cursor:cursor + size * a].reshape(size, a)
            cursor += size * a
            vals = block.astype(np.int64) @ pow2[a]
            vals = np.where(vals >= 1 << (a - 1), vals - (1 << a), vals)
            delta = 2.0 ** ((idx - STEP_BIAS) / STEP_SCALE)
            coeffs[t, edges[b]:edges[b + 1]] = vals * delta

    if config.has_sbr:
        _decode_sbr(coeffs, frames[:, :reserve], config)

    samples = mdct_synthesize(coeffs, original_length)
    return AudioClip(sample_rate=sample_rate,
                     samples=np.clip(samples, -1.0, 1.0))


def _decode_sbr(coeffs, sbr_bytes, config: PtcConfig):
    """Fill bins above the cutoff with an energy-matched lowband copy."""
    edges = config.sbr_edges()
    cut = config.cut_bin
    nframes = coeffs.shape[0]
    for i in range(SBR_BANDS):
        lo, hi = int(edges[i]), int(edges[i + 1])
        width = hi - lo
        if width <= 0:
            continue
        idx = sbr_bytes[:, i].astype(np.float64)
        target = np.where(idx == 0, 0.0, 10.0 ** ((idx / 2.0 - 68.0) / 10.0))
        src_lo = max(cut - width, 0)
        source = coeffs[:, src_lo:cut]
        if source.shape[1] < width:  # narrow core: tile it
            reps = -(-width // max(source.shape[1], 1))
            source = np.tile(source, (1, reps))[:, :width]
        else:
            source = source[:, -width:]
        src_energy = np.sum(source ** 2, axis=1)
        gain = np.sqrt(target / np.maximum(src_energy, SBR_EPS))
        silent_src = src_energy < SBR_EPS
        if np.any(silent_src):
            flat = np.sqrt(target / width)[:, None] * \
                np.power(-1.0, np.arange(width))[None, :]
            coeffs[silent_src, lo:hi] = flat[silent_src]
        live = ~silent_src
        coeffs[live, lo:hi] = source[live] * gain[live, None]
