"""Exception hierarchy shared by all voxkit modules."""


class VoxkitError(Exception):
    """Base class for all toolkit errors."""


class FormatError(VoxkitError):
    """A file or byte stream does not match its declared format."""


class DomainError(VoxkitError):
    """Input data is well-formed but outside an operation's domain.

    Examples: a contour with no voiced frames where speech statistics are
    required, a dead EMG channel, mismatched feature dimensions.
    """
