"""Error types shared across the package."""


class InputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class CapacityError(RuntimeError):
    """Raised when an exact enumeration would exceed its size budget."""
