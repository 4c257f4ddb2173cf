"""MSB-first bit packing over Python bigints.

Accumulating into one int and serializing once is much faster than
byte-at-a-time shifting for the frame sizes used here.
"""

import numpy as np


class BitWriter:
    def __init__(self):
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, width: int):
        if width < 0 or value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        self._acc = (self._acc << width) | value
        self._nbits += width

    def write_signed(self, value: int, width: int):
        # two's complement
        self.write(value & ((1 << width) - 1), width)

    def write_array(self, values, widths):
        """Append values[i] in widths[i] bits each; arrays of equal length."""
        acc = self._acc
        nbits = self._nbits
        for value, width in zip(values.tolist(), widths.tolist()):
            acc = (acc << width) | value
            nbits += width
        self._acc = acc
        self._nbits = nbits

    @property
    def bit_length(self) -> int:
        return self._nbits

    def to_bytes(self, size: int = None) -> bytes:
        """Serialize, zero-padding the tail up to size bytes if given."""
        nbytes = (self._nbits + 7) // 8
        pad = nbytes * 8 - self._nbits
        raw = (self._acc << pad).to_bytes(nbytes, "big")
        if size is not None:
            if nbytes > size:
                raise ValueError(f"{nbytes} bytes exceed frame size {size}")
            raw = raw + b"\x00" * (size - nbytes)
        return raw


class BitReader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0  # bit cursor

    def read(self, width: int) -> int:
        end = self._pos + width
        if end > len(self._data) * 8:
            raise EOFError(f"bitstream exhausted at bit {self._pos}")
        value = 0
        pos = self._pos
        while width > 0:
            byte = self._data[pos >> 3]
            avail = 8 - (pos & 7)
            take = min(avail, width)
            shift = avail - take
            value = (value << take) | ((byte >> shift) & ((1 << take) - 1))
            pos += take
            width -= take
        self._pos = pos
        return value

    def read_signed(self, width: int) -> int:
        value = self.read(width)
        if value >= 1 << (width - 1):
            value -= 1 << width
        return value

    def read_signed_array(self, count: int, width: int) -> np.ndarray:
        out = np.empty(count, dtype=np.int64)
        half = 1 << (width - 1)
        full = 1 << width
        for i in range(count):
            value = self.read(width)
            out[i] = value - full if value >= half else value
        return out

    @property
    def bits_left(self) -> int:
        return len(self._data) * 8 - self._pos
