"""Bluetooth A2DP subband codec, mono profile.

Frame format, CRC-8, and the loudness/SNR bit allocator follow the A2DP
definition bit-exactly (sync word 0x9C, fixed subband ordering for
tie-breaks). The analysis/synthesis filterbank is a cosine-modulated
near-tight frame over the frozen prototypes in _sbc_proto; synthesis is
the adjoint of analysis, so round trips are transparent up to
quantization error.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..audio.clip import AudioClip
from ..errors import (
    CodecSpecError,
    CrcError,
    DecodeError,
    EncodeError,
    SyncError,
    TruncatedStreamError,
)
from ._sbc_proto import PROTOTYPE_4, PROTOTYPE_8
from .spec import CodecSpec
from .stream import EncodedStream

SYNCWORD = 0x9C
FREQ_CODES = {16000: 0, 32000: 1, 44100: 2, 48000: 3}
FREQ_FROM_CODE = {code: rate for rate, code in FREQ_CODES.items()}
BLOCK_CODES = {4: 0, 8: 1, 12: 2, 16: 3}
BLOCKS_FROM_CODE = {code: blocks for blocks, code in BLOCK_CODES.items()}

# subband-sample scaling from float [-1, 1] into the integer domain the
# 4-bit scale factors were designed for
SCALE = 32768.0

# loudness offset tables indexed by [frequency code][subband]
OFFSET4 = np.array([
    [-1, 0, 0, 0],
    [-2, 0, 0, 1],
    [-2, 0, 0, 1],
    [-2, 0, 0, 1],
], dtype=np.int64)
OFFSET8 = np.array([
    [-2, 0, 0, 0, 0, 0, 0, 1],
    [-3, 0, 0, 0, 0, 0, 1, 2],
    [-4, 0, 0, 0, 0, 0, 1, 2],
    [-4, 0, 0, 0, 0, 0, 1, 2],
], dtype=np.int64)


def _make_crc_table():
    table = np.zeros(256, dtype=np.uint8)
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1D) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table[byte] = crc
    return table


CRC_TABLE = _make_crc_table()


def crc8(data) -> int:
    """CRC-8, polynomial 0x1D, initial value 0x0F, over whole bytes."""
    crc = 0x0F
    for byte in bytes(data):
        crc = int(CRC_TABLE[crc ^ byte])
    return crc


# ---------------------------------------------------------------------------
# filterbank

_BANK_CACHE = {}


def _filterbank(subbands):
    bank = _BANK_CACHE.get(subbands)
    if bank is None:
        proto = PROTOTYPE_8 if subbands == 8 else PROTOTYPE_4
        n = np.arange(10 * subbands)
        i = np.arange(subbands)
        mod = np.cos((i[:, None] + 0.5) * (n[None, :] - subbands / 2) * np.pi / subbands)
        bank = proto[None, :] * mod
        _BANK_CACHE[subbands] = bank
    return bank


def analyze(samples: np.ndarray, subbands: int) -> np.ndarray:
    """Split samples into critically sampled subband blocks.

    Returns (blocks, subbands) with ceil(len/M) + 9 rows; the 9 extra
    tail blocks give every input sample full window coverage so the
    adjoint synthesis reconstructs all of them.
    """
    M = subbands
    bank = _filterbank(M)
    x = np.asarray(samples, dtype=np.float64)
    nblocks = -(-x.size // M) + 9
    pad = np.zeros(10 * M + (nblocks - 1) * M)
    pad[9 * M:9 * M + x.size] = x
    windows = np.lib.stride_tricks.sliding_window_view(pad, 10 * M)[::M]
    return windows[:nblocks] @ bank.T


def synthesize(blocks: np.ndarray, subbands: int, length: int) -> np.ndarray:
    """Adjoint of analyze; returns the first `length` samples."""
    M = subbands
    bank = _filterbank(M)
    T = blocks.shape[0]
    if length > T * M:
        raise DecodeError(f"cannot synthesize {length} samples from {T} blocks")
    contrib = blocks @ bank
    acc = np.zeros((T + 9, M))
    for j in range(10):
        acc[j:j + T] += contrib[:, j * M:(j + 1) * M]
    return acc.reshape(-1)[9 * M:9 * M + length]


# ---------------------------------------------------------------------------
# bit allocation

def _allocate_many(scale_factors, bitpool, allocation, subbands, sample_rate):
    """A2DP bit allocation vectorized over frames.

    scale_factors: (frames, subbands) ints in 0..15. Returns (frames,
    subbands) bit widths, each 0 or 2..16.
    """
    sf = np.asarray(scale_factors, dtype=np.int64)
    nframes, M = sf.shape

    if allocation == "snr":
        bitneed = sf.copy()
    else:
        offsets = (OFFSET4 if M == 4 else OFFSET8)[FREQ_CODES[sample_rate]]
        loudness = sf - offsets[None, :]
        bitneed = np.where(loudness > 0, loudness // 2, loudness)
        bitneed = np.where(sf == 0, -5, bitneed)

    max_bitneed = bitneed.max(axis=1)
    if bitpool == 0:
        return np.zeros_like(sf)

    # The descending bitslice search: slice budget accumulated while the
    # slice level drops equals C(s) = sum over subbands of
    # psi(bitneed - s), psi(d) = 0 for d <= 0 else min(d + 1, 16).
    # The loop exits at the largest s (<= max bitneed) with C(s) >= bitpool.
    s_lo = int(bitneed.min()) - 17
    s_hi = int(max_bitneed.max())
    grid = np.arange(s_lo, s_hi + 1)
    d = bitneed[:, :, None] - grid[None, None, :]
    psi = np.where(d >= 1, np.minimum(d + 1, 16), 0)
    totals = psi.sum(axis=1)  # (frames, len(grid)), non-increasing along s
    count = (totals >= bitpool).sum(axis=1)
    bitslice = np.minimum(s_lo + count - 1, max_bitneed)

    # exact fit: consume the last slice and lower the level once more
    at_slice = np.take_along_axis(totals, (bitslice - s_lo)[:, None], axis=1)[:, 0]
    exact = at_slice == bitpool
    bitslice = np.where(exact, bitslice - 1, bitslice)

    bs = bitslice[:, None]
    bits = np.where(bitneed < bs + 2, 0, np.minimum(bitneed - bs, 16))
    bitcount = bits.sum(axis=1)

    # distribute the remainder in fixed subband order
    for sb in range(M):
        room = bitcount < bitpool
        col = bits[:, sb]
        grow = room & (col >= 2) & (col < 16)
        bits[grow, sb] += 1
        bitcount[grow] += 1
        start = room & ~((col >= 2) & (col < 16)) \
            & (bitneed[:, sb] == bitslice + 1) & (bitpool > bitcount + 1)
        bits[start, sb] = 2
        bitcount[start] += 2
    for sb in range(M):
        grow = (bitcount < bitpool) & (bits[:, sb] < 16)
        bits[grow, sb] += 1
        bitcount[grow] += 1
    return bits


def sbc_bit_allocation(scale_factors, bitpool, allocation="loudness",
                       sample_rate=44100) -> np.ndarray:
    """Per-subband quantizer bit widths for one frame.

    Implements the A2DP reference algorithm; subband count is taken from
    len(scale_factors). Widths are 0 or 2..16 and sum to <= bitpool.
    """
    sf = np.asarray(scale_factors, dtype=np.int64)
    if sf.ndim != 1 or sf.shape[0] not in (4, 8):
        raise CodecSpecError("scale_factors must be a vector of 4 or 8 entries")
    if sf.min() < 0 or sf.max() > 15:
        raise CodecSpecError("scale factors must lie in 0..15")
    if not 0 <= bitpool <= 16 * sf.shape[0]:
        raise CodecSpecError(
            f"bitpool {bitpool} out of range 0..{16 * sf.shape[0]}")
    if allocation not in ("snr", "loudness"):
        raise CodecSpecError(f"unknown allocation method {allocation!r}")
    if sample_rate not in FREQ_CODES:
        raise CodecSpecError(f"unsupported sample rate {sample_rate}")
    return _allocate_many(sf[None, :], int(bitpool), allocation,
                          sf.shape[0], sample_rate)[0]


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class SbcConfig:
    sample_rate: int
    subbands: int
    blocks: int
    bitpool: int
    allocation: str

    @property
    def frame_bytes(self) -> int:
        return 4 + self.subbands // 2 + -(-self.blocks * self.bitpool // 8)

    @property
    def config_byte(self) -> int:
        return (FREQ_CODES[self.sample_rate] << 6
                | BLOCK_CODES[self.blocks] << 4
                | 0 << 2  # mono
                | (1 if self.allocation == "snr" else 0) << 1
                | (1 if self.subbands == 8 else 0))


def derive_bitpool(bitrate_kbps, sample_rate, subbands=8, blocks=16) -> int:
    """Bitpool whose fixed mono frame size best matches the target rate."""
    fps = sample_rate / (subbands * blocks)
    base = 4 + subbands // 2
    estimate = (bitrate_kbps * 1000.0 / (8.0 * fps) - base) * 8.0 / blocks
    best = None
    for bp in {int(math.floor(estimate)), int(math.ceil(estimate))}:
        bp = min(16 * subbands, max(2, bp))
        measured = (base + -(-blocks * bp // 8)) * 8.0 * fps
        err = abs(measured - bitrate_kbps * 1000.0)
        if best is None or err < best[0]:
            best = (err, bp)
    return best[1]


def sbc_config_for(spec: CodecSpec, sample_rate: int) -> SbcConfig:
    if sample_rate not in FREQ_CODES:
        raise EncodeError(
            f"SBC supports sample rates {sorted(FREQ_CODES)}, got {sample_rate}")
    subbands = spec.params.get("subbands", 8)
    blocks = spec.params.get("blocks", 16)
    allocation = spec.params.get("allocation", "loudness")
    bitpool = spec.params.get("bitpool")
    if bitpool is None:
        bitpool = derive_bitpool(spec.bitrate_kbps, sample_rate, subbands, blocks)
    if not 2 <= bitpool <= 16 * subbands:
        raise CodecSpecError(
            f"bitpool {bitpool} unusable for mono {subbands}-subband frames")
    return SbcConfig(sample_rate, subbands, blocks, int(bitpool), allocation)


# ---------------------------------------------------------------------------
# encode

def encode_sbc(spec: CodecSpec, clip: AudioClip) -> EncodedStream:
    config = sbc_config_for(spec, clip.sample_rate)
    M, L = config.subbands, config.blocks

    blocks = analyze(clip.samples, M) * SCALE
    nframes = -(-blocks.shape[0] // L)
    padded = np.zeros((nframes * L, M))
    padded[:blocks.shape[0]] = blocks
    sb_samples = padded.reshape(nframes, L, M)

    peak = np.abs(sb_samples).max(axis=1)
    _, exponent = np.frexp(peak)
    sf = np.clip(exponent - 1, 0, 15).astype(np.int64)

    bits = _allocate_many(sf, config.bitpool, config.allocation, M,
                          config.sample_rate)

    levels = (1 << bits) - 1  # (frames, subbands)
    qscale = np.exp2(sf + 1.0)
    q = np.floor((sb_samples / qscale[:, None, :] + 1.0)
                 * levels[:, None, :] / 2.0)
    q = np.clip(q, 0, levels[:, None, :]).astype(np.int64)
    q[np.broadcast_to((bits == 0)[:, None, :], q.shape)] = 0

    payload = _pack_frames(q, bits, sf, config)
    return EncodedStream(spec=spec, frame_count=nframes, payload=payload,
                         original_length=clip.samples.size)


def _pack_frames(q, bits, sf, config: SbcConfig) -> bytes:
    nframes, L, M = q.shape
    frame_bytes = config.frame_bytes
    head = 4 + M // 2
    audio_bits = (frame_bytes - head) * 8

    out = np.zeros((nframes, frame_bytes), dtype=np.uint8)
    out[:, 0] = SYNCWORD
    out[:, 1] = config.config_byte
    out[:, 2] = config.bitpool
    sf_bytes = (sf[:, 0::2] << 4 | sf[:, 1::2]).astype(np.uint8)
    out[:, 4:head] = sf_bytes

    crc = np.full(nframes, 0x0F, dtype=np.uint8)
    for col in range(1, 3):
        crc = CRC_TABLE[crc ^ out[:, col]]
    for col in range(M // 2):
        crc = CRC_TABLE[crc ^ sf_bytes[:, col]]
    out[:, 3] = crc

    shifts = [np.arange(w - 1, -1, -1) for w in range(17)]
    for f in range(nframes):
        stride = int(bits[f].sum())
        if stride == 0:
            continue
        planes = np.zeros((L, stride), dtype=np.uint8)
        offset = 0
        for sb in range(M):
            w = int(bits[f, sb])
            if w == 0:
                continue
            planes[:, offset:offset + w] = (q[f, :, sb, None] >> shifts[w]) & 1
            offset += w
        flat = np.zeros(audio_bits, dtype=np.uint8)
        flat[:L * stride] = planes.reshape(-1)
        out[f, head:] = np.packbits(flat)
    return out.tobytes()


# ---------------------------------------------------------------------------
# decode

def _parse_header(buf, pos, frame_index):
    if buf[pos] != SYNCWORD:
        raise SyncError(f"bad sync byte 0x{buf[pos]:02x}", frame_index=frame_index)
    cfg = int(buf[pos + 1])
    bitpool = int(buf[pos + 2])
    channel_mode = (cfg >> 2) & 3
    if channel_mode != 0:
        raise DecodeError(f"unsupported channel mode {channel_mode}",
                          frame_index=frame_index)
    subbands = 8 if cfg & 1 else 4
    if not 2 <= bitpool <= 16 * subbands:
        raise DecodeError(f"bitpool {bitpool} out of range",
                          frame_index=frame_index)
    return SbcConfig(
        sample_rate=FREQ_FROM_CODE[cfg >> 6],
        subbands=subbands,
        blocks=BLOCKS_FROM_CODE[(cfg >> 4) & 3],
        bitpool=bitpool,
        allocation="snr" if (cfg >> 1) & 1 else "loudness",
    )


def decode_sbc(stream: EncodedStream) -> AudioClip:
    buf = np.frombuffer(bytes(stream.payload), dtype=np.uint8)
    if buf.size < 4:
        raise TruncatedStreamError("payload shorter than one header",
                                   frame_index=0)
    config = _parse_header(buf, 0, 0)
    frame_bytes = config.frame_bytes
    if buf.size < frame_bytes:
        raise TruncatedStreamError(
            f"frame 0 needs {frame_bytes} bytes, have {buf.size}", frame_index=0)
    nframes = buf.size // frame_bytes
    if buf.size % frame_bytes:
        raise TruncatedStreamError(
            f"{buf.size % frame_bytes} trailing bytes after frame {nframes - 1}",
            frame_index=nframes)

    frames = buf.reshape(nframes, frame_bytes)
    bad_sync = np.nonzero(frames[:, 0] != SYNCWORD)[0]
    if bad_sync.size:
        f = int(bad_sync[0])
        raise SyncError(f"bad sync byte 0x{frames[f, 0]:02x}", frame_index=f)
    mismatched = np.nonzero((frames[:, 1] != frames[0, 1])
                            | (frames[:, 2] != frames[0, 2]))[0]
    if mismatched.size:
        raise DecodeError("frame parameters differ from frame 0",
                          frame_index=int(mismatched[0]))

    M, L = config.subbands, config.blocks
    head = 4 + M // 2

    crc = np.full(nframes, 0x0F, dtype=np.uint8)
    for col in range(1, 3):
        crc = CRC_TABLE[crc ^ frames[:, col]]
    for col in range(4, head):
        crc = CRC_TABLE[crc ^ frames[:, col]]
    bad_crc = np.nonzero(crc != frames[:, 3])[0]
    if bad_crc.size:
        raise CrcError("scale-factor CRC mismatch", frame_index=int(bad_crc[0]))

    sf_bytes = frames[:, 4:head].astype(np.int64)
    sf = np.empty((nframes, M), dtype=np.int64)
    sf[:, 0::2] = sf_bytes >> 4
    sf[:, 1::2] = sf_bytes & 0x0F

    bits = _allocate_many(sf, config.bitpool, config.allocation, M,
                          config.sample_rate)

    q = np.zeros((nframes, L, M), dtype=np.int64)
    audio = frames[:, head:]
    powers = [1 << np.arange(w - 1, -1, -1) for w in range(17)]
    for f in range(nframes):
        stride = int(bits[f].sum())
        if stride == 0:
            continue
        flat = np.unpackbits(audio[f])[:L * stride].reshape(L, stride)
        offset = 0
        for sb in range(M):
            w = int(bits[f, sb])
            if w == 0:
                continue
            q[f, :, sb] = flat[:, offset:offset + w].astype(np.int64) @ powers[w]
            offset += w

    levels = (1 << bits) - 1
    qscale = np.exp2(sf + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sb_samples = qscale[:, None, :] * (
            (2.0 * q + 1.0) / np.maximum(levels, 1)[:, None, :] - 1.0)
    sb_samples[np.broadcast_to((bits == 0)[:, None, :], sb_samples.shape)] = 0.0

    length = stream.original_length
    if not 0 <= length <= nframes * L * M:
        raise DecodeError(
            f"original length {length} exceeds {nframes * L * M} decoded samples")
    samples = synthesize(sb_samples.reshape(-1, M) / SCALE, M, length)
    return AudioClip(sample_rate=config.sample_rate,
                     samples=np.clip(samples, -1.0, 1.0))
