"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a construction or argument contract."""


class InfeasibleError(Exception):
    """The requested quantity does not exist in the given parameter regime."""
