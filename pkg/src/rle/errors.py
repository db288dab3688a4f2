"""Exception hierarchy for the rle package.

Every error raised by the library derives from :class:`RleError`, so callers
(and the CLI exit-code mapping) can catch one base class.
"""


class RleError(Exception):
    """Base class for all rle errors."""


# -- decomposition -----------------------------------------------------------

class DimensionNotDivisible(RleError):
    """Image width/height is not divisible by the requested grid side."""


class TooSmall(RleError):
    """Grid side below the minimum of 2."""


class TooFewTokens(RleError):
    """Sentence has fewer than 2 whitespace-separated tokens."""


class IncompletePlacement(RleError):
    """A slot was left without an assigned element."""


# -- adjacency features ------------------------------------------------------

class AsymmetricInput(RleError):
    """Matrix handed to lower_triangle is not symmetric."""


# -- surrogate ---------------------------------------------------------------

class Degenerate(RleError):
    """Auxiliary dataset has zero feature dimension or zero rows."""


class NonFinite(RleError):
    """Non-finite value found in fit inputs."""


class DimensionMismatch(RleError):
    """Feature vector length does not match the fitted dimension."""


# -- models / bridge ---------------------------------------------------------

class ModelUnavailable(RleError):
    """Bridge process dead or endpoint unreachable."""


class ProtocolError(RleError):
    """Malformed or out-of-contract bridge response."""


class ScoreNotFinite(RleError):
    """Model returned a NaN or infinite score."""


class SpawnFailed(RleError):
    """Bridge child process could not be started."""


class HandshakeTimeout(RleError):
    """Bridge did not complete the handshake in time."""


# -- explanation -------------------------------------------------------------

class InsufficientPermutations(RleError):
    """Permutation count below 1."""


class KOutOfRange(RleError):
    """top_pairs k outside [1, n(n-1)/2]."""


class ModalityMismatch(RleError):
    """Operation requires a different modality (image vs text)."""


# -- evaluation --------------------------------------------------------------

class TooManySegments(RleError):
    """Requested more segments than there are pixels."""


class ZeroOriginalScore(RleError):
    """Original class score is zero; removal curve undefined."""
