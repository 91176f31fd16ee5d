"""Exception types shared across the toolkit.

Every error raised by anchorcloud derives from :class:`AnchorCloudError`,
so callers (and the CLI) can catch one base class at the boundary.
"""


class AnchorCloudError(Exception):
    """Base class for all anchorcloud errors."""


class EmptyInputError(AnchorCloudError):
    """An operation received an empty cloud, matrix, or collection."""


class InsufficientPointsError(AnchorCloudError):
    """More points were requested than the cloud contains."""


class DegenerateCloudError(AnchorCloudError):
    """Cloud has no spatial extent (or too few points) for the operation."""


class ZeroVectorError(AnchorCloudError):
    """A zero-norm feature vector reached a cosine computation."""


class ShapeMismatchError(AnchorCloudError):
    """Feature dimensions or matrix shapes are incompatible."""


class BankError(AnchorCloudError):
    """Anchor-bank construction or merge violated a bank invariant."""


class AlignmentError(AnchorCloudError):
    """Prediction ids and ground-truth ids do not line up one-to-one."""


class ConfigError(AnchorCloudError):
    """A configuration value is out of range for the data it is applied to."""


class InsufficientDataError(AnchorCloudError):
    """Not enough samples for the requested aggregate computation."""


class ParseError(AnchorCloudError):
    """A text format (OFF, XYZ, manifest) failed to parse.

    ``line`` is the 1-based line number of the offending input when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(AnchorCloudError):
    """A binary feature file is malformed or truncated."""


class BackendError(AnchorCloudError):
    """An external featurizer process violated the bridge protocol."""
