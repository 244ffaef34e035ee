"""Exception types raised by the ipqz library.

Every error is a subclass of IpqzError so callers can catch the whole
family. Grouping mirrors the failure domains: input validation, codec
and container integrity, dataset parsing, and geometric preconditions.
"""


class IpqzError(Exception):
    """Base class for all ipqz errors."""


# ---------------------------------------------------------------------------
# quantization / planning

class NonFinite(IpqzError):
    """Input vector contains NaN or infinity."""


class NormTooLarge(IpqzError):
    """Input vector norm exceeds 1 + 2**-20."""


class ZeroVector(IpqzError):
    """Vector is zero (or rounds to the zero grid vector)."""


class BudgetExceeded(IpqzError):
    """Sum of magnitudes exceeds the grid budget s."""


class InvalidThresholds(IpqzError):
    """Threshold pair (alpha, beta) out of range or not ordered."""


class InvalidEpsilon(IpqzError):
    """Estimation accuracy epsilon outside (0, 1]."""


# ---------------------------------------------------------------------------
# codec / container

class IndexOutOfRange(IpqzError):
    """Composition index is >= C(s+d, d)."""


class MalformedCode(IpqzError):
    """Code word fails structural validation."""


class GridMismatch(IpqzError):
    """Operation mixes code words from different grids."""


class SpecIncompatible(IpqzError):
    """Grid resolution too coarse for the requested threshold pair."""


class BadMagic(IpqzError):
    """Container does not start with the IPQZ magic."""


class VersionUnsupported(IpqzError):
    """Container version is not supported by this reader."""


class TruncatedFile(IpqzError):
    """Container ends before the declared payload."""


class ChecksumMismatch(IpqzError):
    """Container header checksum does not match."""


# ---------------------------------------------------------------------------
# dataset ingestion

class ParseError(IpqzError):
    """Input file cannot be parsed.

    Carries the byte offset of the failure when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DimensionMismatch(IpqzError):
    """Records in one file disagree on dimension."""


class AllZero(IpqzError):
    """Every vector in the set is zero; nothing to normalize."""


class SetTooSmall(IpqzError):
    """Not enough vectors to sample the requested pairs."""


# ---------------------------------------------------------------------------
# lower-bound machinery

class DegenerateAngle(IpqzError):
    """Vectors are (anti)parallel; the witness formula divides by sin(theta)."""


class GapViolated(IpqzError):
    """Pair angle is below the threshold gap angle."""


class BudgetTooSmall(Warning):
    """Candidate stream exhausted before the sphere was saturated.

    Reported as a warning, not an exception: the returned packing is
    still a valid code, it just may not witness the full bound.
    """
