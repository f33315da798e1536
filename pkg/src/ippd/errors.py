"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and DataError (and subclasses)
to exit code 3; everything else is a bug.
"""


class IppdError(Exception):
    """Base class for package errors."""


class ConfigError(IppdError):
    """Bad or unknown configuration keys / values."""


class DataError(IppdError):
    """Missing, malformed, or inconsistent data on disk."""


class MapFormatError(DataError):
    """Map file magic/version/payload problems."""


class MapBoundsError(IppdError):
    """A world point or pose lies outside the map bounds."""


class ProposalError(IppdError):
    """Path proposal could not produce any candidate where one is required."""
