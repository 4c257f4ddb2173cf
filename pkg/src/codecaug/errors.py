"""Exception types shared across the toolkit."""


class CodecaugError(Exception):
    """Base class for all toolkit errors."""


class WavError(CodecaugError):
    """Base class for WAV file problems."""


class MalformedRiffError(WavError):
    """The RIFF/WAVE container structure is broken."""


class UnsupportedWavError(WavError):
    """The WAV file is valid but uses a codec/layout we do not read."""


class ManifestError(CodecaugError):
    """Dataset manifest is malformed or references bad data."""


class RecipeError(CodecaugError):
    """A scene recipe violates its invariants."""


class CodecSpecError(CodecaugError):
    """A codec spec string or parameter set is invalid."""


class EncodeError(CodecaugError):
    """Encoding failed (unsupported input or configuration)."""


class DecodeError(CodecaugError):
    """Bitstream could not be decoded.

    frame_index is the 0-based frame at which the problem was detected,
    or None when the container itself is broken.
    """

    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class SyncError(DecodeError):
    """Frame sync word mismatch."""


class CrcError(DecodeError):
    """Frame CRC check failed."""


class TruncatedStreamError(DecodeError):
    """Payload ends before the declared frame data."""


class ExternalEncoderError(CodecaugError):
    """The external encoder process failed or is misconfigured."""


class FeatureError(CodecaugError):
    """Feature extraction preconditions violated."""


class QualityError(CodecaugError):
    """Quality metric preconditions violated."""


class ModelError(CodecaugError):
    """Model configuration, shape, or persistence problem."""


class TrainingError(CodecaugError):
    """Training failed; carries epoch/batch context when known."""

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class PipelineError(CodecaugError):
    """Experiment pipeline failure; carries condition context."""
