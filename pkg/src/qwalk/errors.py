class QWalkError(Exception):
    """Base class for simulator errors."""


class ConfigError(QWalkError):
    """Invalid or inconsistent simulation input."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"token {position}: {message}"
        super().__init__(message)
        self.position = position


class SimulationError(QWalkError):
    """Raised when a run violates an internal invariant (e.g. unitarity)."""
