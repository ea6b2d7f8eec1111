"""Exception types shared across the package."""


class LawError(ValueError):
    """Invalid distribution parameters, or a law used in an illegal role."""


class KernelError(ValueError):
    """Invalid immigration-kernel specification."""


class ConfigError(ValueError):
    """Experiment config rejected; message starts with the offending field path."""


class NonAbsorbedPathError(RuntimeError):
    """A birth-death path exhausted its jump budget before hitting 0.

    Carries the partial path so callers can inspect how far the simulation
    got.  Frequent occurrences signal that the expected absorption time may
    be infinite for the configured rates.
    """

    def __init__(self, message, partial_path):
        super().__init__(message)
        self.partial_path = partial_path


class TruncationError(RuntimeError):
    """Stationary evaluation could not push the tail bound below tolerance.

    Carries the best truncated values and the bound actually achieved;
    ``replicate`` is filled in when raised from a replicated run.
    """

    def __init__(self, message, values=None, bound=None, c_used=None, replicate=None):
        super().__init__(message)
        self.values = values
        self.bound = bound
        self.c_used = c_used
        self.replicate = replicate
