"""Exception hierarchy shared by all featcodec modules."""


class FeatCodecError(Exception):
    """Base class for all featcodec errors."""


class ValidationError(FeatCodecError):
    """An invariant on a tensor, plane, or config was violated."""


class FormatError(FeatCodecError):
    """A container or bitstream file is malformed (magic, version, length)."""


class CodecError(FeatCodecError):
    """Encoding or decoding failed (corrupt payload, desync, range error)."""
