class KBQDError(Exception):
    """Base class for every error raised by the kbqd package."""


class InputError(KBQDError, ValueError):
    """Invalid arguments, data or configuration supplied by the caller."""


class ComputationError(KBQDError, RuntimeError):
    """A numerical step failed (non-SPD matrix, singular covariance, ...)."""
