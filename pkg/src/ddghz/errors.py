"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration, register file, or plan input."""


class InvariantViolation(RuntimeError):
    """A numerical invariant was broken beyond roundoff tolerance.

    Raised when a quantity that must lie in a known range (norms,
    probabilities, invariants in [0, 1]) deviates by more than the
    clamping tolerance. Indicates an upstream bug, not user error.
    """
