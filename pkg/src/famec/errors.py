"""Exception types shared across the package."""


class FamecError(Exception):
    """Base class for all package-specific errors."""


class RankDeficientChannel(FamecError):
    """Channel matrix is too ill-conditioned for zero-forcing combining."""


class ZeroRate(FamecError):
    """An uplink rate of zero or below makes a transfer latency undefined."""


class ZeroFrequency(FamecError):
    """A zero CPU frequency makes an execution latency undefined."""


class ScenarioInvalid(FamecError):
    """Scenario parameters violate a structural requirement (e.g. more users than antennas)."""


class ParseError(FamecError):
    """Config file is malformed: bad syntax, unknown or duplicate key."""


class ValidationError(FamecError):
    """Config values break a documented invariant."""


class IoError(FamecError):
    """Result files could not be written."""
