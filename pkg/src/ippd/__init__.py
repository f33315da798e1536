"""Instruction-aware path proposal and discrimination on semantic voxel maps."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, IppdError, MapBoundsError, MapFormatError, ProposalError

__all__ = [
    "IppdError",
    "ConfigError",
    "DataError",
    "MapFormatError",
    "MapBoundsError",
    "ProposalError",
    "__version__",
]
