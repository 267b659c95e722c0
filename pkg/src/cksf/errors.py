"""Exception types shared across the simulator."""


class CksfError(Exception):
    """Base class for all simulator errors."""


class GridMismatch(CksfError):
    """Fields on incompatible grids were combined."""


class CustomFieldNegative(CksfError):
    """A user-supplied initial field violates its sign requirement."""


class NegativeDensity(CksfError):
    """A density argument that must be nonnegative carries a negative entry."""


class NoConvergence(CksfError):
    """An iterative solve failed to reach its residual target."""

    def __init__(self, message, iterations, last_residual):
        super().__init__(message)
        self.iterations = iterations
        self.last_residual = last_residual


class CflViolation(CksfError):
    """Time step too large for the advective stability limit."""


class MonotonicityViolation(CksfError):
    """A substep broke a positivity/maximum-principle contract.

    This signals a dt-contract bug in the caller, not a tunable tolerance.
    """


class InvariantViolation(CksfError):
    """A full-step invariant check failed; the failing check is named."""

    def __init__(self, check, detail=""):
        super().__init__(f"invariant violated: {check}" + (f" ({detail})" if detail else ""))
        self.check = check


class ConfigError(CksfError):
    """Bad run configuration text; carries the 1-based offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownKeyError(ConfigError):
    pass


class ConfigTypeError(ConfigError):
    pass


class ConfigRangeError(ConfigError):
    pass


class BadSnapshot(CksfError):
    """Malformed snapshot file (bad header or truncated payload)."""
