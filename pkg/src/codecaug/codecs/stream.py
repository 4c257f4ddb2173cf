from dataclasses import dataclass

from .spec import CodecSpec


@dataclass
class EncodedStream:
    """Coded bitstream plus the bookkeeping needed to invert it.

    payload is the serialized byte form: raw concatenated A2DP frames
    for SBC, a PTC1 container for the transform family.
    """
    spec: CodecSpec
    frame_count: int
    payload: bytes
    original_length: int

    def measured_bitrate_kbps(self, sample_rate: int) -> float:
        duration = self.original_length / sample_rate
        return 8.0 * len(self.payload) / duration / 1000.0
