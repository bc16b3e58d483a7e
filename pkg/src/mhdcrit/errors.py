"""Exception hierarchy shared by all modules."""


class MHDError(Exception):
    """Base class for every error raised by mhdcrit."""


class InvalidExponent(MHDError, ValueError):
    pass


class DegenerateInput(MHDError, ValueError):
    pass


class GridMismatch(MHDError, ValueError):
    pass


class UnsupportedGrid(MHDError, ValueError):
    pass


class NotSolenoidal(MHDError, ValueError):
    pass


class NonLocalized(MHDError, ValueError):
    """A test function does not decay inside the box, so R^3 emulation fails."""


class TimeOrder(MHDError, ValueError):
    pass


class BlowupDetected(MHDError, RuntimeError):
    """Non-finite values appeared during time stepping.

    ``t`` is the time of the last finite state and ``diagnostics`` holds
    whatever scalar diagnostics were available for it.
    """

    def __init__(self, message, t, diagnostics=None):
        super().__init__(message)
        self.t = t
        self.diagnostics = dict(diagnostics or {})


class CheckpointError(MHDError, IOError):
    pass


class BadMagic(CheckpointError):
    pass


class UnsupportedVersion(CheckpointError):
    pass


class TruncatedFile(CheckpointError):
    pass


class ConfigError(MHDError, ValueError):
    """Malformed run configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class WindowTooShort(MHDError, ValueError):
    pass
