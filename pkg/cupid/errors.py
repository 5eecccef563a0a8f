"""Exception hierarchy for the cuboid codec."""


class CupidError(Exception):
    """Base class for every error raised by the cupid package."""


# --- image I/O ---
class ImageFormatError(CupidError, ValueError):
    """Input bytes are not a supported PPM/PGM image."""


class MalformedHeader(ImageFormatError):
    pass


class UnsupportedMaxval(ImageFormatError):
    pass


class TruncatedData(ImageFormatError):
    pass


# --- partitioning ---
class PartitionError(CupidError, ValueError):
    """Requested cuboid count is outside 1..X*Y."""


class NZero(PartitionError):
    pass


class NTooLarge(PartitionError):
    pass


class DimensionMismatch(CupidError, ValueError):
    """Two inputs that must describe the same frame do not."""


class EmptyHistogram(CupidError, ValueError):
    pass


class FrameTooLarge(CupidError, ValueError):
    """Frame is too large to encode (16-bit header fields) or to decode (configured pixel limit)."""


# --- bitstream ---
class StreamError(CupidError, ValueError):
    """A .cupd stream could not be decoded."""


class BadMagic(StreamError):
    pass


class BadVersion(StreamError):
    pass


class InfeasibleSplit(StreamError):
    pass


class TruncatedStream(StreamError):
    pass


class TrailingData(StreamError):
    pass
