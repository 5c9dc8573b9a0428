"""Exception types shared across gridpulse modules."""


class GridPulseError(Exception):
    """Base class for all gridpulse errors."""


class UnknownIdentifierError(GridPulseError, KeyError):
    """A bus, PMU, substation, or event id does not exist."""


class TopologyError(GridPulseError, ValueError):
    """Topology violates a structural invariant (disconnected, bad edge, ...)."""


class GenerationError(GridPulseError, ValueError):
    """Synthetic generation parameters cannot produce a valid output."""


class NyquistError(GridPulseError, ValueError):
    """An event frequency is at or above the Nyquist limit of the sample rate."""


class FormatError(GridPulseError, ValueError):
    """A day file or matrix does not match the declared layout."""


class IntegrityError(GridPulseError):
    """Stored bytes fail checksum validation."""


class RangeError(GridPulseError, ValueError):
    """A requested tick or time range falls outside the stored data."""
