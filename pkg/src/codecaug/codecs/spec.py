"""Codec identity: family + bitrate + optional per-family parameter overrides.

Canonical text form is "family@kbps" with optional ";key=value" suffixes,
e.g. "ptc-mp3@32" or "sbc@64;allocation=snr". Derived settings (SBC
bitpool, PTC cutoff) are computed by the codec from the bitrate unless
explicitly overridden, so parse/to_string round-trips stay canonical.
"""

from dataclasses import dataclass, field

from ..errors import CodecSpecError

# family -> (min kbps, max kbps, allowed override keys)
FAMILIES = {
    "sbc": (30.0, 700.0, {"subbands", "blocks", "bitpool", "allocation"}),
    "ptc-mp3": (8.0, 320.0, {"window", "cutoff"}),
    "ptc-aac": (8.0, 320.0, {"window", "cutoff"}),
    "ptc-heaac": (8.0, 320.0, {"window", "cutoff"}),
    "external": (1.0, 100000.0, {"cmd"}),
}

PTC_FAMILIES = ("ptc-mp3", "ptc-aac", "ptc-heaac")


@dataclass(frozen=True)
class CodecSpec:
    family: str
    bitrate_kbps: float
    params: dict = field(default_factory=dict)

    def __str__(self):
        text = f"{self.family}@{self.bitrate_kbps:g}"
        for key in sorted(self.params):
            text += f";{key}={self.params[key]}"
        return text

    def validate(self):
        if self.family not in FAMILIES:
            raise CodecSpecError(f"unknown codec family {self.family!r}")
        lo, hi, keys = FAMILIES[self.family]
        if not lo <= self.bitrate_kbps <= hi:
            raise CodecSpecError(
                f"bitrate {self.bitrate_kbps:g} kbps outside supported range "
                f"[{lo:g}, {hi:g}] for {self.family}"
            )
        for key, value in self.params.items():
            if key not in keys:
                raise CodecSpecError(f"unknown parameter {key!r} for family {self.family}")
            _validate_param(self.family, key, value)


def _validate_param(family, key, value):
    if key == "subbands" and value not in (4, 8):
        raise CodecSpecError(f"subbands must be 4 or 8, got {value}")
    if key == "blocks" and value not in (4, 8, 12, 16):
        raise CodecSpecError(f"blocks must be 4, 8, 12, or 16, got {value}")
    if key == "bitpool" and not (isinstance(value, int) and 2 <= value <= 250):
        raise CodecSpecError(f"bitpool must be an integer in 2..250, got {value}")
    if key == "allocation" and value not in ("snr", "loudness"):
        raise CodecSpecError(f"allocation must be snr or loudness, got {value}")
    if key == "window":
        if not (isinstance(value, int) and 256 <= value <= 8192 and value & (value - 1) == 0):
            raise CodecSpecError(f"window must be a power of two in 256..8192, got {value}")
    if key == "cutoff" and not value > 0:
        raise CodecSpecError(f"cutoff must be positive, got {value}")


def _parse_value(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_codec_spec(text) -> CodecSpec:
    """Parse "family@kbps[;key=value...]" into a validated CodecSpec."""
    head, *param_parts = text.strip().split(";")
    if "@" not in head:
        raise CodecSpecError(f"codec spec {text!r} must look like family@kbps")
    family, _, rate_text = head.partition("@")
    family = family.strip()
    try:
        bitrate = float(rate_text)
    except ValueError:
        raise CodecSpecError(f"unparseable bitrate {rate_text!r} in {text!r}") from None
    if bitrate <= 0:
        raise CodecSpecError(f"bitrate must be positive, got {bitrate:g} in {text!r}")

    params = {}
    for part in param_parts:
        if "=" not in part:
            raise CodecSpecError(f"parameter {part!r} must look like key=value")
        key, _, value = part.partition("=")
        params[key.strip()] = _parse_value(value.strip())

    spec = CodecSpec(family, bitrate, params)
    spec.validate()
    return spec
