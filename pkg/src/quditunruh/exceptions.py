"""Exception and warning types raised by quditunruh."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved_error):
        super().__init__(f"{message} (achieved error estimate {achieved_error:.3e})")
        self.achieved_error = achieved_error


class UnsupportedRegulatorError(ValueError):
    """The chosen UV regulator cannot evaluate the requested integral."""


class RegulatorScaleError(ValueError):
    """The regulator time scale is not small compared to the switching width."""


class InvalidStateError(ValueError):
    """A matrix fails the density-matrix checks."""


class ConfigError(ValueError):
    """Malformed run configuration; carries the offending location."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class RegimeWarning(UserWarning):
    """Parameters fall outside the regime where a diagnostic is meaningful."""
