"""Exception hierarchy shared by the rasterizer and the asset loaders."""


class QuadSplatError(Exception):
    """Base class for all errors raised by quadsplat."""


class DegenerateCovariance(QuadSplatError, ValueError):
    """A 2D covariance is not (numerically) positive definite."""


class CapacityMismatch(QuadSplatError, RuntimeError):
    """Emitted pair count disagrees with the prefix-summed tile counts."""


class ParseError(QuadSplatError, ValueError):
    """Malformed input file (header, element layout, truncated body, JSON)."""


class UnsupportedFormat(ParseError):
    """Well-formed input in a variant we refuse to read (ascii / big-endian PLY)."""


class SchemaError(QuadSplatError, ValueError):
    """Input parses but lacks a required field or property."""
